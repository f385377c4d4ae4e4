pub mod ci;
pub mod estimate;
pub mod generate;
pub mod rate;
pub mod simulate;

use clap::ValueEnum;
use csrisk_core::estimators::EstimatorKind;
use csrisk_core::inference::CiMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Mle,
    Naive,
    Simple,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(a: EstimatorArg) -> Self {
        match a {
            EstimatorArg::Mle => EstimatorKind::Mle,
            EstimatorArg::Naive => EstimatorKind::Naive,
            EstimatorArg::Simple => EstimatorKind::Simple,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Normal,
    Bootstrap,
    #[value(alias = "likelihood-ratio")]
    Lr,
}

impl From<MethodArg> for CiMethod {
    fn from(a: MethodArg) -> Self {
        match a {
            MethodArg::Normal => CiMethod::Normal,
            MethodArg::Bootstrap => CiMethod::Bootstrap,
            MethodArg::Lr => CiMethod::LikelihoodRatio,
        }
    }
}

/// Requested values in first-seen order without repeats.
pub fn dedup<T: PartialEq + Copy>(items: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for &x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}
