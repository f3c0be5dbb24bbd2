//! Synthetic degradation: condition planning, signal processing, external
//! adapters and corpus generation.

pub mod adapter;
pub mod dsp;
pub mod execute;
pub mod filter;
pub mod plan;
pub mod vad;

pub use adapter::{run_external_adapter, AdapterCommand};
pub use dsp::{
    add_white_noise, clip_amplitude, convolve_rir, mix_background_noise, synthetic_rir, Mixed,
};
pub use execute::{apply_condition, execute_plan, AdapterSet, ExecuteOptions, ExecutionOutcome};
pub use filter::{apply_filter, FilterKind};
pub use plan::{sample_plan, ConditionPlan, ConditionSpec, ParamRanges, WeightTable};
pub use vad::{segment_speech, speech_activity};

/// Scales `x` down so its peak is at most 1 and returns the gain applied.
pub(crate) fn limit_peak(x: &mut [f64]) -> f64 {
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak <= 1.0 {
        return 1.0;
    }
    let g = 1.0 / peak;
    for v in x.iter_mut() {
        *v = (*v * g).clamp(-1.0, 1.0);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_limiting() {
        let mut x = vec![0.5, -2.0, 1.0];
        let g = limit_peak(&mut x);
        assert_eq!(g, 0.5);
        assert_eq!(x, vec![0.25, -1.0, 0.5]);
        let mut y = vec![0.3, -0.9];
        assert_eq!(limit_peak(&mut y), 1.0);
        assert_eq!(y, vec![0.3, -0.9]);
    }
}
