//! Single-magnon dynamics on a square spin lattice with wire-defined guides.
//!
//! Energies are in units of the exchange coupling J, lengths in lattice
//! spacings a and times in ħ/J. Everything except [`units`] is generic over
//! the float type; the aliases below fix it to `f64` (or `f32`).

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod linalg;
pub mod potentials;
pub mod scalar;
pub mod spectral;
pub mod units;

pub use dynamics::{evolve, make_packet, Method, Propagator, PropagatorConfig, Region, WavepacketParams};
pub use error::{MagnonError, Result};
pub use geometry::{GuidePath, PathBuilder, Point, Segment};
pub use lattice::{apply_hamiltonian, build_hamiltonian, Boundary, CouplingSpec, LatticeSpec, SparseHamiltonian, SpinState};
pub use potentials::{layout_to_field, Axis, DmcSpec, GuideSpec, Layout, PotentialField, WirePairProfile};
pub use scalar::Real;
pub use spectral::ModeSet;
pub use units::MaterialParams;

pub use num_complex::Complex;

pub type C64 = Complex<f64>;

pub type Lattice = LatticeSpec<f64>;
pub type Hamiltonian = SparseHamiltonian<f64>;
pub type State = SpinState<f64>;
pub type Field = PotentialField<f64>;
pub type Modes = ModeSet<f64>;
pub type Path = GuidePath<f64>;
pub type Packet = WavepacketParams<f64>;

pub type Lattice32 = LatticeSpec<f32>;
pub type Hamiltonian32 = SparseHamiltonian<f32>;
pub type State32 = SpinState<f32>;
pub type Field32 = PotentialField<f32>;
pub type Modes32 = ModeSet<f32>;
