// Float methods come from libm through num-traits; std builds shadow them
// with inherent methods, so the trait is pulled in through a glob.
#![allow(unused_imports)]

pub(crate) use alloc::vec;
pub(crate) use alloc::vec::Vec;
pub(crate) use num_complex::Complex64;
pub(crate) use num_traits::Float;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
