//! Dense check that coin routing reproduces the controlled-SWAP circuit.
//!
//! Registers are ordered `control ⊗ fresh ⊗ routed`. The control starts in
//! `|+⟩`, the fresh register in `I/d` and the routed register in the
//! post-measurement state of the first query. A controlled-SWAP exchanges
//! the two data registers when the control is `|1⟩`, the second query acts
//! on the routed register and the control is read out in the computational
//! basis.

use std::collections::HashMap;

use num_complex::Complex;
use rand::Rng;

use super::twice::robust_round;
use crate::error::{Error, Result};
use crate::measure::{make_device, Access, Backend, Device, KindSpec};
use crate::qcore::{maximally_mixed, ComplexMatrix, DensityState};
use crate::scalar::Real;

const MAX_DIM: usize = 4;

/// Joint laws of `(coin, i, j)`, flattened as `coin·d² + i·d + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CswapTables {
    pub dim: usize,
    /// Circuit with the control read out after the controlled-SWAP.
    pub circuit: Vec<f64>,
    /// Circuit with the control read out before the controlled-SWAP.
    pub circuit_control_first: Vec<f64>,
    /// Classical coin routing.
    pub routing: Vec<f64>,
}

impl CswapTables {
    pub fn max_circuit_vs_routing(&self) -> f64 {
        max_diff(&self.circuit, &self.routing)
    }

    pub fn max_control_order(&self) -> f64 {
        max_diff(&self.circuit, &self.circuit_control_first)
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn swap_data_registers<T: Real>(d: usize) -> ComplexMatrix<T> {
    let n = d * d;
    let mut s = ComplexMatrix::zeros(n, n);
    for a in 0..d {
        for b in 0..d {
            s[(b * d + a, a * d + b)] = Complex::new(T::one(), T::zero());
        }
    }
    s
}

fn control_projector<T: Real>(bit: usize) -> ComplexMatrix<T> {
    let mut p = ComplexMatrix::zeros(2, 2);
    p[(bit, bit)] = Complex::new(T::one(), T::zero());
    p
}

/// Exact tables for a dense device with post-state access.
pub fn cswap_tables<T: Real>(device: &Device<T>) -> Result<CswapTables> {
    let d = device.dim();
    if d > MAX_DIM {
        return Err(Error::Resource(format!(
            "dense controlled-SWAP simulation is limited to d <= {MAX_DIM}, got {d}"
        )));
    }
    if device.backend() != Backend::Dense {
        return Err(Error::UnsupportedBackend("the circuit check needs a dense device".into()));
    }
    let povm = device
        .known_povm()
        .ok_or_else(|| Error::Unsupported("device POVM unknown".into()))?;
    let k = device.outcome_count();
    if k != d {
        return Err(Error::Unsupported("circuit check expects d outcomes".into()));
    }
    let mixed: DensityState<T> = maximally_mixed(d)?;
    let first_probs = device.outcome_probabilities(&mixed)?;

    let half = T::lit(0.5);
    let plus = ComplexMatrix::from_fn(2, 2, |_, _| Complex::new(half, T::zero()));
    let id_data = ComplexMatrix::identity(d * d);
    let cswap = control_projector::<T>(0)
        .kron(&id_data)
        .add(&control_projector::<T>(1).kron(&swap_data_registers(d)))?;
    let id_d = ComplexMatrix::identity(d);

    // readout operators |c><c| ⊗ I ⊗ M_j
    let readout: Vec<Vec<ComplexMatrix<T>>> = (0..2)
        .map(|c| {
            povm.effects()
                .iter()
                .map(|m| control_projector::<T>(c).kron(&id_d).kron(m))
                .collect()
        })
        .collect();

    let mut circuit = vec![0.0; 2 * d * d];
    let mut control_first = vec![0.0; 2 * d * d];
    let mut routing = vec![0.0; 2 * d * d];

    for (i, &pi) in first_probs.iter().enumerate() {
        if pi <= T::zero() {
            continue;
        }
        let post = device.post_measurement_state(&mixed, i)?;
        let joint = plus.kron(mixed.matrix()).kron(post.matrix());
        let routed = cswap.matmul(&joint)?.matmul(&cswap.adjoint())?;

        // control measured first: project, then apply the controlled-SWAP
        let mut measured_first = ComplexMatrix::zeros(joint.rows(), joint.cols());
        for c in 0..2 {
            let proj = control_projector::<T>(c).kron(&id_data);
            let collapsed = proj.matmul(&joint)?.matmul(&proj)?;
            measured_first.add_assign(&cswap.matmul(&collapsed)?.matmul(&cswap.adjoint())?)?;
        }

        let after_post = device.outcome_probabilities(&post)?;
        let after_fresh = device.outcome_probabilities(&mixed)?;
        for c in 0..2 {
            for j in 0..d {
                let idx = c * d * d + i * d + j;
                let op = &readout[c][j];
                let pi64 = pi.as_f64();
                let routed_dm = DensityState::new(routed.clone())?;
                circuit[idx] = pi64 * routed_dm.expectation(op)?.re.as_f64();
                let first_dm = DensityState::new(measured_first.clone())?;
                control_first[idx] = pi64 * first_dm.expectation(op)?.re.as_f64();
                let cond = if c == 0 { after_post[j] } else { after_fresh[j] };
                routing[idx] = pi64 * 0.5 * cond.as_f64();
            }
        }
    }
    Ok(CswapTables {
        dim: d,
        circuit,
        circuit_control_first: control_first,
        routing,
    })
}

/// Per-device outcome of the equivalence check.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CswapCase {
    pub device: String,
    pub max_table_diff: f64,
    pub max_control_order_diff: f64,
    pub sampled_tv: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CswapReport {
    pub dim: usize,
    pub shots: usize,
    pub cases: Vec<CswapCase>,
    pub passed: bool,
}

/// Exact table tolerance.
pub const TABLE_TOLERANCE: f64 = 1e-10;
/// Total-variation tolerance between sampled circuit and sampled routing.
pub const SAMPLED_TV_TOLERANCE: f64 = 0.02;

/// Compares circuit and coin routing for a Haar projective device and the
/// classical device: exact tables within `1e-10`, and `reps` sampled shots
/// of each within total variation `0.02`.
pub fn controlled_swap_equivalence_check<R: Rng + ?Sized>(d: usize, reps: usize, rng: &mut R) -> Result<CswapReport> {
    if d > MAX_DIM {
        return Err(Error::Resource(format!(
            "dense controlled-SWAP simulation is limited to d <= {MAX_DIM}, got {d}"
        )));
    }
    if d < 2 {
        return Err(Error::DegenerateDimension(d));
    }
    let specs: [(&str, KindSpec<f64>); 2] = [
        ("projective-haar", KindSpec::ProjectiveHaar { dim: d }),
        ("classical-uniform", KindSpec::ClassicalUniform { dim: d }),
    ];
    let mut cases = Vec::new();
    for (name, spec) in specs {
        let device = make_device(spec, Access::WithPostState, Backend::Dense, rng)?;
        let tables = cswap_tables(&device)?;

        let mut circuit_counts: HashMap<usize, usize> = HashMap::new();
        let mut routing_counts: HashMap<usize, usize> = HashMap::new();
        for _ in 0..reps {
            let cell = sample_table(&tables.circuit, rng);
            *circuit_counts.entry(cell).or_default() += 1;
            let r = robust_round(&device, rng)?;
            let cell = usize::from(r.coin) * d * d + r.first * d + r.second;
            *routing_counts.entry(cell).or_default() += 1;
        }
        let tv = 0.5
            * (0..tables.circuit.len())
                .map(|cell| {
                    let a = *circuit_counts.get(&cell).unwrap_or(&0) as f64;
                    let b = *routing_counts.get(&cell).unwrap_or(&0) as f64;
                    (a - b).abs() / reps.max(1) as f64
                })
                .sum::<f64>();
        cases.push(CswapCase {
            device: name.to_string(),
            max_table_diff: tables.max_circuit_vs_routing(),
            max_control_order_diff: tables.max_control_order(),
            sampled_tv: tv,
        });
    }
    let passed = cases.iter().all(|c| {
        c.max_table_diff <= TABLE_TOLERANCE
            && c.max_control_order_diff <= TABLE_TOLERANCE
            && c.sampled_tv <= SAMPLED_TV_TOLERANCE
    });
    Ok(CswapReport {
        dim: d,
        shots: reps,
        cases,
        passed,
    })
}

fn sample_table<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    crate::measure::device::sample_weights(p, rng)
}
