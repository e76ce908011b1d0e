use bitstring::BitString;
use qubo::QuboMatrix;

/// Ising energy function over spins z in {+1, -1}^n:
///
/// ```text
/// E(z) = constant + sum_i h_i z_i + sum_{i<j} J_ij z_i z_j
/// ```
///
/// Built from a QUBO through the substitution x_i = (1 - z_i) / 2, so that
/// every bit vector satisfies `ising energy = qubo energy + offset` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    h: Vec<f64>,
    /// Dense symmetric coupling matrix with zero diagonal; row scans make
    /// incremental energy updates O(n).
    j: Vec<f64>,
    pub constant: f64,
}

impl IsingModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self, i: usize) -> f64 {
        self.h[i]
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.j[i * self.n + j]
    }

    /// Nonzero couplings as ((i, j), value) with i < j.
    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| {
                let v = self.j[i * self.n + j];
                (v != 0.0).then_some(((i, j), v))
            })
        })
    }

    /// Direct energy evaluation of a spin assignment.
    pub fn spin_energy(&self, spins: &[i8]) -> f64 {
        debug_assert_eq!(spins.len(), self.n);
        let mut e = self.constant;
        for i in 0..self.n {
            let zi = spins[i] as f64;
            e += self.h[i] * zi;
            for j in (i + 1)..self.n {
                e += self.j[i * self.n + j] * zi * spins[j] as f64;
            }
        }
        e
    }

    /// Energy of the computational basis state with the given index, qubit
    /// i being bit i (x_i = 1 maps to z_i = -1).
    pub fn basis_energy(&self, index: u64) -> f64 {
        let spins: Vec<i8> = (0..self.n)
            .map(|i| if (index >> i) & 1 == 1 { -1 } else { 1 })
            .collect();
        self.spin_energy(&spins)
    }

    pub fn bit_energy(&self, bits: &BitString) -> f64 {
        let spins: Vec<i8> = bits.iter().map(|b| if b == 1 { -1 } else { 1 }).collect();
        self.spin_energy(&spins)
    }
}

/// Standard reduction x_i = (1 - z_i)/2:
///
/// - J_ij = Q_ij / 4
/// - h_i = -Q_ii/2 - (sum over couplings touching i) / 4
/// - constant = offset + sum_i Q_ii/2 + sum_{i<j} Q_ij/4
pub fn qubo_to_ising(q: &QuboMatrix) -> IsingModel {
    let n = q.n();
    let mut h = vec![0.0; n];
    let mut j = vec![0.0; n * n];
    let mut constant = q.offset;

    for i in 0..n {
        let d = q.get(i, i);
        h[i] -= d / 2.0;
        constant += d / 2.0;
        for jj in (i + 1)..n {
            let c = q.get(i, jj);
            if c != 0.0 {
                j[i * n + jj] = c / 4.0;
                j[jj * n + i] = c / 4.0;
                h[i] -= c / 4.0;
                h[jj] -= c / 4.0;
                constant += c / 4.0;
            }
        }
    }

    IsingModel { n, h, j, constant }
}

/// Precomputed Ising energies of all 2^n computational basis states,
/// indexed by basis index (qubit 0 = least significant bit).
///
/// Filled by a Gray-code walk with O(n) incremental updates, re-anchored
/// against exact evaluation every 4096 states to keep accumulated roundoff
/// far below the 1e-9 tolerances downstream.
#[derive(Debug, Clone)]
pub struct BasisEnergies {
    table: Vec<f64>,
}

impl BasisEnergies {
    pub fn new(ising: &IsingModel) -> Self {
        let n = ising.n();
        let size = 1usize << n;
        let mut table = vec![0.0; size];

        let mut spins = vec![1i8; n];
        let mut energy = ising.spin_energy(&spins);
        table[0] = energy;
        let mut gray_index = 0u64;

        for step in 1..size as u64 {
            let flip = step.trailing_zeros() as usize;
            // Gray code: state at `step` differs from the previous one in
            // exactly bit `flip`.
            let z_old = spins[flip] as f64;
            let mut local = ising.field(flip);
            for j in 0..n {
                if j != flip && spins[j] == -1 {
                    local -= ising.coupling(flip, j);
                } else if j != flip {
                    local += ising.coupling(flip, j);
                }
            }
            energy -= 2.0 * z_old * local;
            spins[flip] = -spins[flip];
            gray_index ^= 1 << flip;
            if step % 4096 == 0 {
                energy = ising.spin_energy(&spins);
            }
            table[gray_index as usize] = energy;
        }

        BasisEnergies { table }
    }

    #[inline]
    pub fn get(&self, index: usize) -> f64 {
        self.table[index]
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.table
    }

    /// Index and energy of the lowest-energy basis state.
    pub fn minimum(&self) -> (usize, f64) {
        let mut best = (0usize, self.table[0]);
        for (i, &e) in self.table.iter().enumerate() {
            if e < best.1 {
                best = (i, e);
            }
        }
        best
    }
}
