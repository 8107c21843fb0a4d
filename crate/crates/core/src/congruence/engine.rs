use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use rayon::prelude::*;

use super::{EliminationTrace, Limits, ResidueConstraint, TraceStatus, TraceStep};
use crate::equation::{Assignment, Equation, Var};
use crate::error::{Error, Result};
use crate::ntheory::{gcd, mod_mul, power_track, reduce, track_shape, PowerTrack, PrimePower};

/// Cells processed per parallel task.
const CHUNK: usize = 1024;

/// Positions (tail plus residue classes) allowed for one variable; cell
/// entries are `u32`.
const MAX_POSITIONS: u64 = u32::MAX as u64;

#[derive(Debug, Clone)]
struct Slot {
    var: Var,
    base: u64,
    term: usize,
    first_in_term: bool,
    last_in_term: bool,
}

/// The exact set of exponent cells compatible with the factors processed so
/// far.
///
/// Variable `i` is tracked with a tail `T_i` and modulus `M_i`; its cell
/// position `p` means the exponent `p` when `p < T_i` and the class
/// `α ≡ p - T_i (mod M_i)`, `α >= T_i` otherwise.
#[derive(Debug, Clone)]
pub struct JointSet {
    slots: Vec<Slot>,
    coefficients: Vec<BigInt>,
    constant: BigInt,
    rhs: BigInt,
    tails: Vec<u64>,
    moduli: Vec<u64>,
    cells: Vec<u32>,
    len: usize,
    steps: Vec<TraceStep>,
}

/// How one variable's positions refine under a factor. Nothing is
/// tabulated per position, so large moduli with few cells stay cheap.
struct Shape {
    t0: u64,
    m0: u64,
    t1: u64,
    m1: u64,
    track: PowerTrack,
}

impl Shape {
    /// New positions covered by old position `p`.
    fn children(&self, p: u64, out: &mut Vec<u32>) {
        out.clear();
        if p < self.t0 {
            out.push(p as u32);
            return;
        }
        let r = p - self.t0;
        let mut u = representative(self.t0, self.m0, r);
        while u < self.t1 {
            out.push(u as u32);
            u += self.m0;
        }
        for k in 0..self.m1 / self.m0 {
            let c = (r + k * self.m0) % self.m1;
            out.push((self.t1 + c) as u32);
        }
    }

    fn child_count(&self, p: u64) -> u64 {
        if p < self.t0 {
            return 1;
        }
        let first = representative(self.t0, self.m0, p - self.t0);
        let smalls = if first < self.t1 { (self.t1 - first).div_ceil(self.m0) } else { 0 };
        smalls + self.m1 / self.m0
    }

    /// `b^α mod q` at new position `p`.
    fn value(&self, p: u64) -> u64 {
        let alpha = if p < self.t1 { p } else { representative(self.t1, self.m1, p - self.t1) };
        self.track.residue_at(alpha)
    }
}

/// Per-factor data shared by the enumeration workers.
struct Lift {
    q: u64,
    target: u64,
    coefficients: Vec<u64>,
    shapes: Vec<Shape>,
}

/// Smallest `α >= tail` with `α ≡ r (mod modulus)`.
fn representative(tail: u64, modulus: u64, r: u64) -> u64 {
    tail + (r + modulus - tail % modulus) % modulus
}

impl JointSet {
    /// Every exponent tuple, before any factor.
    pub fn new(eq: &Equation) -> Self {
        let mut slots = Vec::new();
        let mut coefficients = Vec::new();
        let mut constant = BigInt::from(0);
        for term in eq.terms() {
            if term.is_constant() {
                constant += &term.coefficient;
                continue;
            }
            let j = coefficients.len();
            coefficients.push(term.coefficient.clone());
            let k = term.powers.len();
            for (i, p) in term.powers.iter().enumerate() {
                slots.push(Slot {
                    var: p.var.clone(),
                    base: p.base,
                    term: j,
                    first_in_term: i == 0,
                    last_in_term: i + 1 == k,
                });
            }
        }
        let n = slots.len();
        JointSet {
            slots,
            coefficients,
            constant,
            rhs: eq.rhs().clone(),
            tails: vec![0; n],
            moduli: vec![1; n],
            cells: vec![0; n],
            len: 1,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn variables(&self) -> Vec<Var> {
        self.slots.iter().map(|s| s.var.clone()).collect()
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn into_trace(self, status: TraceStatus) -> EliminationTrace {
        EliminationTrace { steps: self.steps, status }
    }

    fn track_shapes(&self, q: u64) -> Result<Vec<(u64, u64)>> {
        let mut cache: HashMap<u64, (u64, u64)> = HashMap::new();
        self.slots
            .iter()
            .map(|s| {
                if let Some(&t) = cache.get(&s.base) {
                    return Ok(t);
                }
                let t = track_shape(s.base, q)?;
                cache.insert(s.base, t);
                Ok(t)
            })
            .collect()
    }

    /// Tracks longer than `max_len` are refused rather than listed.
    fn tracks(&self, q: u64, max_len: u64) -> Result<Vec<PowerTrack>> {
        let mut cache: HashMap<u64, PowerTrack> = HashMap::new();
        self.slots
            .iter()
            .map(|s| {
                if let Some(t) = cache.get(&s.base) {
                    return Ok(t.clone());
                }
                let (tail, period) = track_shape(s.base, q)?;
                if tail + period > max_len {
                    return Err(Error::ResourceLimit { size: (tail + period) as u128, ceiling: max_len as u128 });
                }
                let t = power_track(s.base, q)?;
                cache.insert(s.base, t.clone());
                Ok(t)
            })
            .collect()
    }

    fn next_shape(&self, tracks: &[(u64, u64)]) -> Result<(Vec<u64>, Vec<u64>)> {
        let mut tails = Vec::with_capacity(tracks.len());
        let mut moduli = Vec::with_capacity(tracks.len());
        for (i, &(tail, period)) in tracks.iter().enumerate() {
            let t = self.tails[i].max(tail);
            let m = self.moduli[i] / gcd(self.moduli[i], period);
            let m = m
                .checked_mul(period)
                .ok_or(Error::ResourceLimit { size: u128::MAX, ceiling: MAX_POSITIONS as u128 })?;
            let positions = t.saturating_add(m);
            if positions > MAX_POSITIONS {
                return Err(Error::ResourceLimit { size: positions as u128, ceiling: MAX_POSITIONS as u128 });
            }
            tails.push(t);
            moduli.push(m);
        }
        Ok((tails, moduli))
    }

    /// Upper bound on how many cells one cell can split into under `q_pow`:
    /// the goodness of `q_pow` for the equation rewritten on the current
    /// residue classes, widened by any new tail positions.
    pub fn growth(&self, q_pow: u64) -> Result<u128> {
        let (tails, moduli) = self.next_shape(&self.track_shapes(q_pow)?)?;
        let mut g: u128 = 1;
        for i in 0..self.slots.len() {
            let classes = moduli[i] / self.moduli[i];
            let smalls = (tails[i] - self.tails[i]).div_ceil(self.moduli[i]);
            g = g.saturating_mul((classes + smalls) as u128);
        }
        Ok(g)
    }

    /// Index into `pending` of the factor with least growth, ties to the
    /// smaller factor. Factors whose tracks cannot be built sort last.
    pub fn best_factor(&self, pending: &[PrimePower]) -> usize {
        let scores: Vec<(u128, u64)> = pending
            .par_iter()
            .map(|t| (self.growth(t.value()).unwrap_or(u128::MAX), t.value()))
            .collect();
        (0..pending.len()).min_by_key(|&i| scores[i]).expect("non-empty pending list")
    }

    fn lift(&self, q: u64, max_track: u64) -> Result<(Lift, Vec<u64>, Vec<u64>)> {
        let tracks = self.tracks(q, max_track)?;
        let shapes: Vec<(u64, u64)> = tracks.iter().map(|t| (t.tail, t.period)).collect();
        let (tails, moduli) = self.next_shape(&shapes)?;
        let shapes = tracks
            .into_iter()
            .enumerate()
            .map(|(i, track)| Shape { t0: self.tails[i], m0: self.moduli[i], t1: tails[i], m1: moduli[i], track })
            .collect();
        let constant = reduce(&self.constant, q);
        let target = (reduce(&self.rhs, q) + q - constant) % q;
        let coefficients = self.coefficients.iter().map(|c| reduce(c, q)).collect();
        Ok((Lift { q, target, coefficients, shapes }, tails, moduli))
    }

    fn lifted_count(&self, lift: &Lift) -> u128 {
        let n = self.slots.len();
        if n == 0 {
            return self.len as u128;
        }
        self.cells
            .chunks(n)
            .map(|cell| {
                cell.iter()
                    .enumerate()
                    .fold(1u128, |acc, (i, &p)| acc.saturating_mul(lift.shapes[i].child_count(p as u64) as u128))
            })
            .fold(0u128, u128::saturating_add)
    }

    /// Number of cells examined if `q_pow` were processed next.
    pub fn lift_size(&self, q_pow: u64, limits: &Limits) -> Result<u128> {
        let (lift, _, _) = self.lift(q_pow, limits.ceiling as u64)?;
        Ok(self.lifted_count(&lift))
    }

    /// Process one more factor.
    pub fn refine(&self, factor: PrimePower, limits: &Limits) -> Result<JointSet> {
        self.refine_counted(factor, limits).map(|(next, _)| next)
    }

    /// [`refine`](Self::refine), also returning how many lifted cells were
    /// examined. When that equals the new length the factor pruned nothing.
    pub fn refine_counted(&self, factor: PrimePower, limits: &Limits) -> Result<(JointSet, u128)> {
        let q = factor.value();
        let (lift, tails, moduli) = self.lift(q, limits.ceiling as u64)?;
        let work = self.lifted_count(&lift);
        if work > limits.work {
            return Err(Error::ResourceLimit { size: work, ceiling: limits.work });
        }
        let n = self.slots.len();
        let kept = AtomicUsize::new(0);
        let (cells, len) = if n == 0 {
            let hit = self.len > 0 && lift.target == 0;
            (Vec::new(), usize::from(hit))
        } else {
            let parts: Vec<Option<Vec<u32>>> = self
                .cells
                .par_chunks(n * CHUNK)
                .map(|chunk| {
                    let mut out = Vec::new();
                    let mut scratch = vec![0u32; n];
                    let mut buffers = vec![Vec::new(); n];
                    for cell in chunk.chunks(n) {
                        self.walk(&lift, cell, 0, 0, 1, &mut scratch, &mut buffers, &mut out);
                    }
                    let total = kept.fetch_add(out.len() / n, Ordering::Relaxed) + out.len() / n;
                    (total <= limits.ceiling).then_some(out)
                })
                .collect();
            let mut cells = Vec::new();
            for p in parts {
                match p {
                    Some(p) => cells.extend(p),
                    None => {
                        let size = kept.load(Ordering::Relaxed) as u128;
                        return Err(Error::ResourceLimit { size, ceiling: limits.ceiling as u128 });
                    }
                }
            }
            let len = cells.len() / n;
            (cells, len)
        };
        let mut next = JointSet {
            slots: self.slots.clone(),
            coefficients: self.coefficients.clone(),
            constant: self.constant.clone(),
            rhs: self.rhs.clone(),
            tails,
            moduli,
            cells,
            len,
            steps: self.steps.clone(),
        };
        let constraints = next.constraints();
        next.steps.push(TraceStep { factor, constraints });
        Ok((next, work))
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        lift: &Lift,
        cell: &[u32],
        i: usize,
        sum: u64,
        prod: u64,
        scratch: &mut [u32],
        buffers: &mut [Vec<u32>],
        out: &mut Vec<u32>,
    ) {
        if i == self.slots.len() {
            if sum == lift.target {
                out.extend_from_slice(scratch);
            }
            return;
        }
        let slot = &self.slots[i];
        let prod = if slot.first_in_term { lift.coefficients[slot.term] } else { prod };
        let mut children = std::mem::take(&mut buffers[i]);
        lift.shapes[i].children(cell[i] as u64, &mut children);
        for &p in &children {
            scratch[i] = p;
            let pr = mod_mul(prod, lift.shapes[i].value(p as u64), lift.q);
            if slot.last_in_term {
                self.walk(lift, cell, i + 1, (sum + pr) % lift.q, 1, scratch, buffers, out);
            } else {
                self.walk(lift, cell, i + 1, sum, pr, scratch, buffers, out);
            }
        }
        buffers[i] = children;
    }

    /// Projection of the set onto each variable.
    pub fn constraints(&self) -> Vec<ResidueConstraint> {
        let n = self.slots.len();
        (0..n)
            .map(|i| {
                let (t, m) = (self.tails[i], self.moduli[i]);
                let seen: BTreeSet<u64> = self.cells.chunks(n).map(|cell| cell[i] as u64).collect();
                let mut small = BTreeSet::new();
                let mut residues = BTreeSet::new();
                for p in seen {
                    if p < t {
                        small.insert(p);
                    } else {
                        residues.insert(p - t);
                    }
                }
                ResidueConstraint { var: self.slots[i].var.clone(), tail: t, small, modulus: m, residues }
            })
            .collect()
    }

    /// Explicit exponents for the first surviving cell.
    pub fn witness(&self) -> Option<Assignment> {
        if self.is_empty() {
            return None;
        }
        let n = self.slots.len();
        Some(
            (0..n)
                .map(|i| {
                    let p = self.cells[i] as u64;
                    let (t, m) = (self.tails[i], self.moduli[i]);
                    let alpha = if p < t { p } else { representative(t, m, p - t) };
                    (self.slots[i].var.clone(), alpha)
                })
                .collect(),
        )
    }
}
