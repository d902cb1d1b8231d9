//! The black-box measurement devices and their query semantics.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::povm::{projective_instrument, Instrument, Povm};
use crate::error::{Error, Result};
use crate::qcore::{maximally_mixed, sample_haar_state, sample_haar_unitary, DensityState, PureState, UnitaryMatrix};
use crate::scalar::Real;

/// What the device hands back besides the outcome label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Access {
    ClassicalOnly,
    WithPostState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Density-matrix simulation of every query.
    Dense,
    /// Analytic shortcuts for the two hypothesis devices.
    Fast,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Backend::Dense),
            "fast" => Ok(Backend::Fast),
            other => Err(Error::Usage(format!("unknown backend '{other}' (expected fast|dense)"))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Dense => "dense",
            Backend::Fast => "fast",
        })
    }
}

/// The two scenarios a tester must tell apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    /// Uniform random outputs, input left untouched.
    Classical,
    /// Projective measurement in a Haar-random basis.
    Quantum,
}

/// Outcome of a dense query.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome<T> {
    pub index: usize,
    pub post_state: Option<DensityState<T>>,
}

/// Input descriptor understood by the fast backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FastInput {
    /// `|x⟩⟨x|`.
    FixedPure(usize),
    MaximallyMixed,
    /// The post-measurement state left by a previous outcome of this device.
    PostStateOf(usize),
}

/// Cumulative outcome table for `O(log d)` sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeTable<T> {
    cumulative: Vec<T>,
}

impl<T: Real> OutcomeTable<T> {
    pub fn new(weights: &[T]) -> Self {
        let mut acc = T::zero();
        let cumulative = weights
            .iter()
            .map(|&w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probabilities(&self) -> Vec<T> {
        let total = self.total();
        let mut prev = T::zero();
        self.cumulative
            .iter()
            .map(|&c| {
                let p = (c - prev) / total;
                prev = c;
                p
            })
            .collect()
    }

    fn total(&self) -> T {
        *self.cumulative.last().expect("non-empty outcome table")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = T::uniform01(rng) * self.total();
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1)
    }
}

/// Samples an index from unnormalized nonnegative weights.
pub(crate) fn sample_weights<T: Real, R: Rng + ?Sized>(weights: &[T], rng: &mut R) -> usize {
    let total: T = weights.iter().copied().sum();
    let u = T::uniform01(rng) * total;
    let mut acc = T::zero();
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > T::zero() {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// A projective measurement in the basis given by the columns of `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveHaar<T> {
    dim: usize,
    unitary: Option<UnitaryMatrix<T>>,
    /// Outcome law for input `|0⟩`; present on the fast backend.
    fixed_input: Option<OutcomeTable<T>>,
}

impl<T: Real> ProjectiveHaar<T> {
    pub fn unitary(&self) -> Option<&UnitaryMatrix<T>> {
        self.unitary.as_ref()
    }

    /// `|⟨x|Π_i|x⟩| = |U_{x,i}|²`.
    fn basis_weights(&self, x: usize) -> Option<Vec<T>> {
        self.unitary
            .as_ref()
            .map(|u| u.matrix().row(x).iter().map(|z| z.norm_sqr()).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeviceKind<T> {
    ClassicalUniform { dim: usize },
    ProjectiveHaar(ProjectiveHaar<T>),
    Custom(Instrument<T>),
}

/// How to build a device.
#[derive(Clone, Debug)]
pub enum KindSpec<T> {
    ClassicalUniform { dim: usize },
    /// Projective measurement with a freshly sampled Haar basis.
    ProjectiveHaar { dim: usize },
    /// Projective measurement with an injected basis.
    Projective(UnitaryMatrix<T>),
    Custom(Instrument<T>),
    /// Either hypothesis with equal prior probability.
    RandomHypothesis { dim: usize },
}

/// A memoryless black box: every query applies the same measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Device<T> {
    kind: DeviceKind<T>,
    access: Access,
    backend: Backend,
}

/// Builds a device, drawing any needed randomness from `rng`.
pub fn make_device<T: Real, R: Rng + ?Sized>(
    spec: KindSpec<T>,
    access: Access,
    backend: Backend,
    rng: &mut R,
) -> Result<Device<T>> {
    let kind = match spec {
        KindSpec::ClassicalUniform { dim } => {
            require_dim(dim)?;
            DeviceKind::ClassicalUniform { dim }
        }
        KindSpec::ProjectiveHaar { dim } => {
            require_dim(dim)?;
            match backend {
                Backend::Dense => {
                    let u = sample_haar_unitary(dim, rng)?;
                    DeviceKind::ProjectiveHaar(ProjectiveHaar {
                        dim,
                        unitary: Some(u),
                        fixed_input: None,
                    })
                }
                Backend::Fast => {
                    // U|0⟩ alone fixes the law of a query on |0⟩; the full
                    // unitary is never materialized.
                    let state: PureState<T> = sample_haar_state(dim, rng)?;
                    DeviceKind::ProjectiveHaar(ProjectiveHaar {
                        dim,
                        unitary: None,
                        fixed_input: Some(OutcomeTable::new(&state.probabilities())),
                    })
                }
            }
        }
        KindSpec::Projective(u) => {
            let dim = u.dim();
            let proj = ProjectiveHaar {
                dim,
                fixed_input: None,
                unitary: Some(u),
            };
            let fixed_input = match backend {
                Backend::Fast => proj.basis_weights(0).map(|w| OutcomeTable::new(&w)),
                Backend::Dense => None,
            };
            DeviceKind::ProjectiveHaar(ProjectiveHaar { fixed_input, ..proj })
        }
        KindSpec::Custom(inst) => {
            if backend == Backend::Fast {
                return Err(Error::UnsupportedBackend(
                    "the fast backend only covers the classical and projective devices".into(),
                ));
            }
            DeviceKind::Custom(inst)
        }
        KindSpec::RandomHypothesis { dim } => {
            let spec = if rng.gen::<bool>() {
                KindSpec::ProjectiveHaar { dim }
            } else {
                KindSpec::ClassicalUniform { dim }
            };
            return make_device(spec, access, backend, rng);
        }
    };
    Ok(Device { kind, access, backend })
}

fn require_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidDimension("dimension must be at least 1".into()));
    }
    Ok(())
}

impl<T: Real> Device<T> {
    pub fn kind(&self) -> &DeviceKind<T> {
        &self.kind
    }

    pub fn access(&self) -> Access {
        self.access
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DeviceKind::ClassicalUniform { dim } => *dim,
            DeviceKind::ProjectiveHaar(p) => p.dim,
            DeviceKind::Custom(inst) => inst.dim(),
        }
    }

    /// Number of outcome labels.
    pub fn outcome_count(&self) -> usize {
        match &self.kind {
            DeviceKind::Custom(inst) => inst.outcome_count(),
            _ => self.dim(),
        }
    }

    /// Which hypothesis the device realizes, if it is one of the two.
    pub fn hypothesis(&self) -> Option<Hypothesis> {
        match &self.kind {
            DeviceKind::ClassicalUniform { .. } => Some(Hypothesis::Classical),
            DeviceKind::ProjectiveHaar(_) => Some(Hypothesis::Quantum),
            DeviceKind::Custom(_) => None,
        }
    }

    /// The device POVM when it is known to the simulator.
    pub fn known_povm(&self) -> Option<Povm<T>> {
        match &self.kind {
            DeviceKind::ClassicalUniform { dim } => Povm::uniform(*dim).ok(),
            DeviceKind::ProjectiveHaar(p) => p.unitary.as_ref().map(|u| projective_instrument(u).povm()),
            DeviceKind::Custom(inst) => Some(inst.povm()),
        }
    }

    /// Sharpness of the device POVM. Known in closed form for both
    /// hypothesis devices, even when the basis was never materialized.
    pub fn true_sharpness(&self) -> T {
        match &self.kind {
            DeviceKind::ClassicalUniform { dim } => T::lit(*dim as f64).recip(),
            DeviceKind::ProjectiveHaar(_) => T::one(),
            DeviceKind::Custom(inst) => inst.povm().sharpness(),
        }
    }

    fn check_input_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::Shape(format!(
                "input of dimension {d} for a device of dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Exact Born-rule outcome probabilities `Tr(ρ K_i†K_i)`.
    pub fn outcome_probabilities(&self, input: &DensityState<T>) -> Result<Vec<T>> {
        self.check_input_dim(input.dim())?;
        match &self.kind {
            DeviceKind::ClassicalUniform { dim } => Ok(vec![T::lit(*dim as f64).recip(); *dim]),
            DeviceKind::ProjectiveHaar(p) => {
                let u = p.unitary.as_ref().ok_or_else(missing_unitary)?;
                (0..p.dim)
                    .map(|i| {
                        let col = u.column(i);
                        let rho_u = input.matrix().apply(&col)?;
                        let w: Complex<T> = col.iter().zip(&rho_u).map(|(a, b)| a.conj() * b).sum();
                        Ok(w.re.max(T::zero()))
                    })
                    .collect()
            }
            DeviceKind::Custom(inst) => inst
                .kraus()
                .iter()
                .map(|k| {
                    let m = k.adjoint().matmul(k)?;
                    Ok(input.expectation(&m)?.re.max(T::zero()))
                })
                .collect(),
        }
    }

    /// Post-measurement state `K_i ρ K_i† / Tr(K_i ρ K_i†)`.
    pub fn post_measurement_state(&self, input: &DensityState<T>, index: usize) -> Result<DensityState<T>> {
        match &self.kind {
            DeviceKind::ClassicalUniform { .. } => Ok(input.clone()),
            DeviceKind::ProjectiveHaar(p) => {
                let u = p.unitary.as_ref().ok_or_else(missing_unitary)?;
                let col = u.column(index);
                Ok(PureState::normalized(col)?.to_density())
            }
            DeviceKind::Custom(inst) => {
                let k = &inst.kraus()[index];
                let unnorm = k.matmul(input.matrix())?.matmul(&k.adjoint())?;
                DensityState::from_unnormalized(unnorm)
            }
        }
    }

    /// One dense query: sample an outcome by the Born rule and, when access
    /// allows, return the post-measurement state.
    pub fn query<R: Rng + ?Sized>(&self, input: &DensityState<T>, rng: &mut R) -> Result<MeasurementOutcome<T>> {
        self.check_input_dim(input.dim())?;
        let index = match &self.kind {
            DeviceKind::ClassicalUniform { dim } => rng.gen_range(0..*dim),
            _ => sample_weights(&self.outcome_probabilities(input)?, rng),
        };
        let post_state = match self.access {
            Access::WithPostState => Some(self.post_measurement_state(input, index)?),
            Access::ClassicalOnly => None,
        };
        Ok(MeasurementOutcome { index, post_state })
    }

    /// Outcome law on the fast path, as a probability table.
    pub fn fast_probabilities(&self, input: FastInput) -> Result<Vec<T>> {
        let d = self.dim();
        let uniform = || vec![T::lit(d as f64).recip(); d];
        match (&self.kind, input) {
            (DeviceKind::ClassicalUniform { .. }, _) => Ok(uniform()),
            (DeviceKind::ProjectiveHaar(_), FastInput::MaximallyMixed) => Ok(uniform()),
            (DeviceKind::ProjectiveHaar(_), FastInput::PostStateOf(i)) => {
                self.check_index(i)?;
                let mut p = vec![T::zero(); d];
                p[i] = T::one();
                Ok(p)
            }
            (DeviceKind::ProjectiveHaar(p), FastInput::FixedPure(x)) => {
                self.check_index(x)?;
                match (&p.fixed_input, x) {
                    (Some(table), 0) => Ok(table.probabilities()),
                    _ => p.basis_weights(x).ok_or_else(|| {
                        Error::Unsupported(format!("fixed input |{x}⟩ needs the full unitary"))
                    }),
                }
            }
            (DeviceKind::Custom(_), _) => Err(Error::Unsupported(
                "custom instruments have no fast path".into(),
            )),
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::Shape(format!("index {i} out of range for d = {}", self.dim())));
        }
        Ok(())
    }

    /// One fast-path query, returning only the outcome label.
    pub fn query_fast<R: Rng + ?Sized>(&self, input: FastInput, rng: &mut R) -> Result<usize> {
        if self.backend != Backend::Fast {
            return Err(Error::UnsupportedBackend("query_fast on a dense device".into()));
        }
        let d = self.dim();
        match (&self.kind, input) {
            (DeviceKind::ClassicalUniform { .. }, _) | (DeviceKind::ProjectiveHaar(_), FastInput::MaximallyMixed) => {
                Ok(rng.gen_range(0..d))
            }
            (DeviceKind::ProjectiveHaar(_), FastInput::PostStateOf(i)) => {
                self.check_index(i)?;
                Ok(i)
            }
            (DeviceKind::ProjectiveHaar(p), FastInput::FixedPure(x)) => {
                self.check_index(x)?;
                match (&p.fixed_input, x) {
                    (Some(table), 0) => Ok(table.sample(rng)),
                    _ => {
                        let w = p.basis_weights(x).ok_or_else(|| {
                            Error::Unsupported(format!("fixed input |{x}⟩ needs the full unitary"))
                        })?;
                        Ok(sample_weights(&w, rng))
                    }
                }
            }
            (DeviceKind::Custom(_), _) => Err(Error::Unsupported(
                "custom instruments have no fast path".into(),
            )),
        }
    }
}

fn missing_unitary() -> Error {
    Error::Unsupported("this projective device only stores its fixed-input law".into())
}

/// Input to a [`BlackBox`] query.
#[derive(Clone, Debug, PartialEq)]
pub enum Probe<T> {
    Basis(usize),
    MaximallyMixed,
    State(DensityState<T>),
    /// Symbolic post-state after projective outcome `i` (fast backend).
    Collapsed(usize),
}

/// Result of a [`BlackBox`] query: the label and, when access allows, a
/// probe that re-submits the post-measurement state.
#[derive(Clone, Debug, PartialEq)]
pub struct Response<T> {
    pub index: usize,
    pub post: Option<Probe<T>>,
}

/// Anything a protocol can query. Implemented by [`Device`] and by test
/// doubles such as adversarial stateful devices.
pub trait BlackBox<T: Real> {
    fn dim(&self) -> usize;
    fn access(&self) -> Access;
    fn probe<R: Rng + ?Sized>(&self, input: &Probe<T>, rng: &mut R) -> Result<Response<T>>;
}

impl<T: Real> BlackBox<T> for Device<T> {
    fn dim(&self) -> usize {
        Device::dim(self)
    }

    fn access(&self) -> Access {
        self.access
    }

    fn probe<R: Rng + ?Sized>(&self, input: &Probe<T>, rng: &mut R) -> Result<Response<T>> {
        let keep = self.access == Access::WithPostState;
        match self.backend {
            Backend::Fast => {
                let fast = match input {
                    Probe::Basis(x) => FastInput::FixedPure(*x),
                    Probe::MaximallyMixed => FastInput::MaximallyMixed,
                    Probe::Collapsed(i) => FastInput::PostStateOf(*i),
                    Probe::State(rho) => {
                        self.check_input_dim(rho.dim())?;
                        if !matches!(self.kind, DeviceKind::ClassicalUniform { .. }) {
                            return Err(Error::Unsupported(
                                "the fast projective backend only accepts descriptor inputs".into(),
                            ));
                        }
                        FastInput::MaximallyMixed
                    }
                };
                let index = self.query_fast(fast, rng)?;
                let post = keep.then(|| match self.kind {
                    DeviceKind::ClassicalUniform { .. } => input.clone(),
                    _ => Probe::Collapsed(index),
                });
                Ok(Response { index, post })
            }
            Backend::Dense => {
                // Basis inputs on a projective device: p_i = |U_{x,i}|², no
                // density matrix needed.
                if let (Probe::Basis(x), DeviceKind::ProjectiveHaar(p)) = (input, &self.kind) {
                    self.check_index(*x)?;
                    let w = p.basis_weights(*x).ok_or_else(missing_unitary)?;
                    let index = sample_weights(&w, rng);
                    let post = if keep {
                        let u = p.unitary.as_ref().ok_or_else(missing_unitary)?;
                        Some(Probe::State(PureState::normalized(u.column(index))?.to_density()))
                    } else {
                        None
                    };
                    return Ok(Response { index, post });
                }
                let rho = self.materialize(input)?;
                let out = self.query(&rho, rng)?;
                Ok(Response {
                    index: out.index,
                    post: out.post_state.map(Probe::State),
                })
            }
        }
    }
}

impl<T: Real> Device<T> {
    /// Density matrix for a probe.
    pub fn materialize(&self, input: &Probe<T>) -> Result<DensityState<T>> {
        let d = self.dim();
        match input {
            Probe::Basis(x) => {
                self.check_index(*x)?;
                DensityState::basis(d, *x)
            }
            Probe::MaximallyMixed => maximally_mixed(d),
            Probe::State(rho) => {
                self.check_input_dim(rho.dim())?;
                Ok(rho.clone())
            }
            Probe::Collapsed(i) => {
                self.check_index(*i)?;
                match &self.kind {
                    DeviceKind::ProjectiveHaar(p) => {
                        let u = p.unitary.as_ref().ok_or_else(missing_unitary)?;
                        Ok(PureState::normalized(u.column(*i))?.to_density())
                    }
                    _ => Err(Error::Unsupported("collapsed probe on a non-projective device".into())),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::povm::diagonal_kraus;
    use crate::qcore::{ComplexMatrix, RngStream};

    fn projector(v: &[Complex<f64>]) -> ComplexMatrix<f64> {
        ComplexMatrix::outer(v, v)
    }

    fn diag_instrument() -> Instrument<f64> {
        Instrument::new(vec![
            diagonal_kraus(&[0.75f64.sqrt(), 0.25f64.sqrt()]),
            diagonal_kraus(&[0.25f64.sqrt(), 0.75f64.sqrt()]),
        ])
        .unwrap()
    }

    #[test]
    fn fast_custom_rejected() {
        let mut rng = RngStream::new(1, 0);
        let r = make_device(KindSpec::Custom(diag_instrument()), Access::WithPostState, Backend::Fast, &mut rng);
        assert!(matches!(r, Err(Error::UnsupportedBackend(_))));
    }

    #[test]
    fn identity_basis_is_deterministic() {
        let mut rng = RngStream::new(2, 0);
        let u = UnitaryMatrix::<f64>::identity(2).unwrap();
        let dev = make_device(KindSpec::Projective(u), Access::WithPostState, Backend::Dense, &mut rng).unwrap();
        let rho = DensityState::basis(2, 0).unwrap();
        for _ in 0..100 {
            assert_eq!(dev.query(&rho, &mut rng).unwrap().index, 0);
        }
    }

    #[test]
    fn projective_post_state_is_the_projector() {
        let mut rng = RngStream::new(3, 0);
        let dev: Device<f64> =
            make_device(KindSpec::ProjectiveHaar { dim: 4 }, Access::WithPostState, Backend::Dense, &mut rng).unwrap();
        let u = match dev.kind() {
            DeviceKind::ProjectiveHaar(p) => p.unitary().unwrap().clone(),
            _ => unreachable!(),
        };
        let rho = maximally_mixed(4).unwrap();
        for _ in 0..20 {
            let out = dev.query(&rho, &mut rng).unwrap();
            let post = out.post_state.unwrap();
            let expected = projector(&u.column(out.index));
            assert!(post.matrix().max_abs_diff(&expected).unwrap() < 1e-12);
            assert!((post.trace() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn classical_post_state_is_input() {
        let mut rng = RngStream::new(4, 0);
        let dev: Device<f64> =
            make_device(KindSpec::ClassicalUniform { dim: 3 }, Access::WithPostState, Backend::Dense, &mut rng).unwrap();
        let rho = DensityState::basis(3, 1).unwrap();
        let out = dev.query(&rho, &mut rng).unwrap();
        assert_eq!(out.post_state.unwrap(), rho);
    }

    #[test]
    fn classical_only_hides_post_state() {
        let mut rng = RngStream::new(5, 0);
        let dev: Device<f64> =
            make_device(KindSpec::ProjectiveHaar { dim: 3 }, Access::ClassicalOnly, Backend::Dense, &mut rng).unwrap();
        let out = dev.query(&maximally_mixed(3).unwrap(), &mut rng).unwrap();
        assert!(out.post_state.is_none());
    }

    #[test]
    fn custom_born_rule() {
        let mut rng = RngStream::new(6, 0);
        let dev = make_device(KindSpec::Custom(diag_instrument()), Access::WithPostState, Backend::Dense, &mut rng).unwrap();
        let p = dev.outcome_probabilities(&maximally_mixed(2).unwrap()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        let out = dev.query(&maximally_mixed(2).unwrap(), &mut rng).unwrap();
        let post = out.post_state.unwrap();
        let expected = if out.index == 0 { [0.75, 0.25] } else { [0.25, 0.75] };
        assert!(post.matrix().max_abs_diff(&ComplexMatrix::real_diagonal(&expected)).unwrap() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let mut rng = RngStream::new(7, 0);
        let dev: Device<f64> =
            make_device(KindSpec::ClassicalUniform { dim: 3 }, Access::WithPostState, Backend::Dense, &mut rng).unwrap();
        assert!(matches!(dev.query(&maximally_mixed(2).unwrap(), &mut rng), Err(Error::Shape(_))));
    }

    #[test]
    fn fast_projective_repeats() {
        let mut rng = RngStream::new(8, 0);
        let dev: Device<f64> =
            make_device(KindSpec::ProjectiveHaar { dim: 16 }, Access::WithPostState, Backend::Fast, &mut rng).unwrap();
        for _ in 0..50 {
            assert_eq!(dev.query_fast(FastInput::PostStateOf(3), &mut rng).unwrap(), 3);
        }
        assert!(dev.query_fast(FastInput::FixedPure(1), &mut rng).is_err());
        assert!(dev.query(&maximally_mixed(16).unwrap(), &mut rng).is_err());
    }

    #[test]
    fn fast_and_dense_tables_agree() {
        for d in [2usize, 4, 8] {
            let mut rng = RngStream::new(9, d as u64);
            let u = sample_haar_unitary::<f64, _>(d, &mut rng).unwrap();
            let dense = make_device(KindSpec::Projective(u.clone()), Access::WithPostState, Backend::Dense, &mut rng).unwrap();
            let fast = make_device(KindSpec::Projective(u.clone()), Access::WithPostState, Backend::Fast, &mut rng).unwrap();
            let pd = dense.outcome_probabilities(&DensityState::basis(d, 0).unwrap()).unwrap();
            let pf = fast.fast_probabilities(FastInput::FixedPure(0)).unwrap();
            let pm_d = dense.outcome_probabilities(&maximally_mixed(d).unwrap()).unwrap();
            let pm_f = fast.fast_probabilities(FastInput::MaximallyMixed).unwrap();
            for i in 0..d {
                assert!((pd[i] - pf[i]).abs() < 1e-10);
                assert!((pm_d[i] - pm_f[i]).abs() < 1e-10);
            }
            for i in 0..d {
                let post = dense.materialize(&Probe::Collapsed(i)).unwrap();
                let after = dense.outcome_probabilities(&post).unwrap();
                let fast_after = fast.fast_probabilities(FastInput::PostStateOf(i)).unwrap();
                for j in 0..d {
                    assert!((after[j] - fast_after[j]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn random_hypothesis_is_fair() {
        let mut rng = RngStream::new(10, 0);
        let n = 10_000;
        let quantum = (0..n)
            .filter(|_| {
                let dev: Device<f64> =
                    make_device(KindSpec::RandomHypothesis { dim: 4 }, Access::ClassicalOnly, Backend::Fast, &mut rng).unwrap();
                dev.hypothesis() == Some(Hypothesis::Quantum)
            })
            .count();
        let f = quantum as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((f - 0.5).abs() <= 4.0 * se, "{f}");
    }

    #[test]
    fn outcome_table_sampling_respects_zero_weights() {
        let t = OutcomeTable::new(&[0.0, 0.5, 0.0, 0.5]);
        let mut rng = RngStream::new(11, 0);
        for _ in 0..1000 {
            let i = t.sample(&mut rng);
            assert!(i == 1 || i == 3);
        }
    }
}
