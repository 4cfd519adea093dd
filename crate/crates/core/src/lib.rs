//! Diffraction of cut-and-project tilings through the internal Fourier cocycle.
//!
//! ```
//! use aperiodic_diffraction::{models::builtin, Engine, Weights};
//!
//! let e = Engine::new(builtin("silver")?)?;
//! let k0 = e.module_point(&[0, 0]);
//! let i0 = e.intensity_at(&k0, &Weights::equal(&e.model), None, 30)?;
//! assert!((i0 - (1.0 + 2f64.sqrt()).powi(2) / 8.0).abs() < 1e-12);
//! # Ok::<(), aperiodic_diffraction::Error>(())
//! ```

pub mod algebra;
pub mod cocycle;
pub mod cps;
pub mod diffraction;
pub mod error;
pub mod inflation;
pub mod linalg;
pub mod models;
pub mod scalar;
pub mod verify;
pub mod windows;

pub use algebra::{AlgebraicElement, FieldId};
pub use error::{Error, Result};

/// Double-precision engine types.
pub type Evaluator = cocycle::FourierEvaluator<f64>;
pub type Engine = diffraction::Diffraction<f64>;
pub type Weights = diffraction::WeightVector<f64>;
pub type Cloud = windows::WindowCloud<f64>;

/// Single-precision variants (faster, ~1e-6 accuracy).
pub type EvaluatorF32 = cocycle::FourierEvaluator<f32>;
pub type EngineF32 = diffraction::Diffraction<f32>;
