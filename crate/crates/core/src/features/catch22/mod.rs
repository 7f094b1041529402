//! The canonical 22-feature time-series set, ported from the reference C
//! implementation so results agree to rounding.

mod measures;
mod splinefit;
mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CATCH22_NAMES: [&str; 22] = [
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "CO_HistogramAMI_even_2_5",
    "CO_trev_1_num",
    "MD_hrv_classic_pnn40",
    "SB_BinaryStats_mean_longstretch1",
    "SB_TransitionMatrix_3ac_sumdiagcov",
    "PD_PeriodicityWang_th0_01",
    "CO_Embed2_Dist_tau_d_expfit_meandiff",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "FC_LocalSimple_mean1_tauresrat",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "SP_Summaries_welch_rect_area_5_1",
    "SB_BinaryStats_diff_longstretch0",
    "SB_MotifThree_quantile_hh",
    "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
    "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
    "SP_Summaries_welch_rect_centroid",
    "FC_LocalSimple_mean3_stderr",
];

pub const CATCH22_MIN_LEN: usize = 30;

/// Below this spread the series is treated as constant.
const CONSTANT_SD: f64 = 1e-12;

type Measure = fn(&[f64]) -> f64;

const MEASURES: [Measure; 22] = [
    measures::dn_histogram_mode_5,
    measures::dn_histogram_mode_10,
    measures::co_f1ecac,
    measures::co_first_min_ac,
    measures::co_histogram_ami_even_2_5,
    measures::co_trev_1_num,
    measures::md_hrv_classic_pnn40,
    measures::sb_binary_stats_mean_longstretch1,
    measures::sb_transition_matrix_3ac_sumdiagcov,
    measures::pd_periodicity_wang_th0_01,
    measures::co_embed2_dist_tau_d_expfit_meandiff,
    measures::in_auto_mutual_info_stats_40_gaussian_fmmi,
    measures::fc_local_simple_mean1_tauresrat,
    measures::dn_outlier_include_p_001_mdrmd,
    measures::dn_outlier_include_n_001_mdrmd,
    measures::sp_summaries_welch_rect_area_5_1,
    measures::sb_binary_stats_diff_longstretch0,
    measures::sb_motif_three_quantile_hh,
    measures::sc_fluct_anal_2_rsrangefit_50_1_logi_prop_r1,
    measures::sc_fluct_anal_2_dfa_50_1_2_logi_prop_r1,
    measures::sp_summaries_welch_rect_centroid,
    measures::fc_local_simple_mean3_stderr,
];

/// Values the reference returns when the z-scored input is all NaN,
/// which is what a constant series produces.
fn degenerate() -> [f64; 22] {
    let mut v = [f64::NAN; 22];
    v[2] = 0.0; // CO_f1ecac
    v[3] = 0.0; // CO_FirstMin_ac
    v[9] = 0.0; // PD_PeriodicityWang_th0_01
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Catch22Vector {
    pub values: [f64; 22],
}

impl Catch22Vector {
    pub fn names() -> &'static [&'static str; 22] {
        &CATCH22_NAMES
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        CATCH22_NAMES.iter().position(|&n| n == name).map(|i| self.values[i])
    }

    pub fn is_degenerate(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }
}

/// All 22 features of `x`, computed on its z-scored copy.
pub fn compute_catch22<T: Scalar>(x: &[T]) -> Result<Catch22Vector> {
    if x.len() < CATCH22_MIN_LEN {
        return Err(Error::TooShort { needed: CATCH22_MIN_LEN, got: x.len() });
    }
    let y: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if stats::stddev(&y) < CONSTANT_SD {
        return Ok(Catch22Vector { values: degenerate() });
    }
    let z = stats::zscore(&y);
    let mut values = [0.0; 22];
    for (v, f) in values.iter_mut().zip(MEASURES) {
        *v = f(&z);
    }
    Ok(Catch22Vector { values })
}
