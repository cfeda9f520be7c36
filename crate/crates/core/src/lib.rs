//! Poverty and inequality variations between two periods of paired income
//! data, with the joint asymptotic covariance of the two variations and
//! confidence intervals for their ratio.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`panel`] | paired samples, ECDF, quantiles, pseudo-observations, empirical copula |
//! | [`inequality`] | Theil-like measures (GE, Theil, MLD, Atkinson, Champernowne, Kolm) and Γ_I |
//! | [`poverty`] | FGT, Sen, Kakwani, Shorrocks kernels and Γ_J |
//! | [`joint`] | Γ_IJ, the ratio ΔJ/ΔI, its delta-method variance and Wald intervals |
//! | [`mc`] | synthetic panels, pair bootstrap and coverage experiments |

pub mod error;
pub mod inequality;
pub mod joint;
pub mod mc;
pub mod numeric;
pub mod panel;
pub mod poverty;

pub use error::{Error, ErrorKind, Result};
pub use inequality::{InequalityEstimate, InequalityFit, InequalitySpec};
pub use joint::{Classification, CiMethod, JointReport};
pub use panel::{Ecdf, EmpiricalCopula, IncomePanel, Period, PseudoObs};
pub use poverty::{GammaJ, GpiKernel, LinePolicy, PovertyEstimate, PovertyFit, PovertySpec};
