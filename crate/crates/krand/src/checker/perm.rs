//! A concrete instance checker for the bits of the matrix permanent mod p.
//!
//! The language: an input encodes a square matrix over GF(p) together with a
//! claimed-value bit index; membership means that bit of the permanent is 1.
//! The checker verifies a claimed permanent by downward self-reduction:
//! cofactor expansion along the first row, with the minors joined by a
//! low-degree interpolation curve whose polynomial is read off the oracle
//! and spot-checked at a random point by recursing one size down. A 1x1
//! permanent is its single entry, which closes the recursion without the
//! oracle.

use super::{CheckerRandom, InstanceChecker, Oracle, Verdict};
use crate::bits::Bitstring;
use crate::checker::CheckerError;
use crate::derand::pit::is_prime;

/// Parameters of one permanent language: matrices up to `side` x `side`
/// over GF(p). The interpolation curve at the top level has degree
/// `(side-1)^2`, so the field must offer more points than that.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermParams {
    pub side: usize,
    pub p: u64,
}

impl PermParams {
    pub fn new(side: usize, p: u64) -> Result<Self, CheckerError> {
        if side == 0 || side > 5 {
            return Err(CheckerError::BadParams(format!(
                "side {side} out of range 1..=5"
            )));
        }
        if !is_prime(p) {
            return Err(CheckerError::BadParams(format!("{p} is not prime")));
        }
        let deg = ((side - 1) * (side - 1)) as u64;
        if p <= deg {
            return Err(CheckerError::BadParams(format!(
                "field GF({p}) has too few points for the degree-{deg} curve"
            )));
        }
        Ok(PermParams { side, p })
    }

    /// Bits per field element.
    pub fn value_bits(&self) -> usize {
        64 - (self.p - 1).leading_zeros() as usize
    }

    /// Bits of the claimed-value bit index field.
    pub fn index_bits(&self) -> usize {
        let b = self.value_bits();
        (usize::BITS - (b - 1).leading_zeros()).max(1) as usize
    }

    /// Fixed frame length shared by every instance of the language: 3 side
    /// bits, `side^2` entry slots, and the bit-index field. Sub-instances of
    /// smaller side are padded with zero slots, so every oracle query has
    /// exactly this length.
    pub fn frame_len(&self) -> usize {
        3 + self.side * self.side * self.value_bits() + self.index_bits()
    }

    /// Encode a k x k matrix (row-major) and a claimed-value bit index.
    pub fn encode(&self, k: usize, matrix: &[u64], bit_idx: usize) -> Bitstring {
        assert!(k >= 1 && k <= self.side);
        assert_eq!(matrix.len(), k * k);
        assert!(bit_idx < self.value_bits());
        let b = self.value_bits();
        let mut s = Bitstring::zeros(self.frame_len());
        write_bits(&mut s, 0, 3, k as u64);
        for (slot, &e) in matrix.iter().enumerate() {
            debug_assert!(e < self.p);
            write_bits(&mut s, 3 + slot * b, b, e);
        }
        let idx_pos = 3 + self.side * self.side * b;
        write_bits(&mut s, idx_pos, self.index_bits(), bit_idx as u64);
        s
    }

    /// Decode a frame; `None` for anything malformed (wrong length, side out
    /// of range, entries outside the field, dirty padding, index too large).
    pub fn decode(&self, x: &Bitstring) -> Option<(usize, Vec<u64>, usize)> {
        if x.len() != self.frame_len() {
            return None;
        }
        let b = self.value_bits();
        let k = read_bits(x, 0, 3) as usize;
        if k == 0 || k > self.side {
            return None;
        }
        let mut matrix = Vec::with_capacity(k * k);
        for slot in 0..self.side * self.side {
            let v = read_bits(x, 3 + slot * b, b);
            if slot < k * k {
                if v >= self.p {
                    return None;
                }
                matrix.push(v);
            } else if v != 0 {
                return None;
            }
        }
        let idx_pos = 3 + self.side * self.side * b;
        let bit_idx = read_bits(x, idx_pos, self.index_bits()) as usize;
        if bit_idx >= self.value_bits() {
            return None;
        }
        Some((k, matrix, bit_idx))
    }
}

fn write_bits(s: &mut Bitstring, pos: usize, width: usize, value: u64) {
    for i in 0..width {
        s.set(pos + i, (value >> (width - 1 - i)) & 1 == 1);
    }
}

fn read_bits(s: &Bitstring, pos: usize, width: usize) -> u64 {
    let mut v = 0u64;
    for i in 0..width {
        v = (v << 1) | s.get(pos + i) as u64;
    }
    v
}

/// Permanent of a k x k matrix mod p by expansion along the first row.
pub fn perm_mod_p(matrix: &[u64], k: usize, p: u64) -> u64 {
    assert_eq!(matrix.len(), k * k);
    if k == 0 {
        return 1 % p;
    }
    if k == 1 {
        return matrix[0] % p;
    }
    let mut acc = 0u64;
    for j in 0..k {
        let minor = delete_row0_col(matrix, k, j);
        acc = (acc + matrix[j] % p * perm_mod_p(&minor, k - 1, p)) % p;
    }
    acc
}

fn delete_row0_col(matrix: &[u64], k: usize, col: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity((k - 1) * (k - 1));
    for r in 1..k {
        for c in 0..k {
            if c != col {
                out.push(matrix[r * k + c]);
            }
        }
    }
    out
}

/// The honest oracle: decodes a frame and answers the permanent bit; 0 on
/// malformed queries.
#[derive(Debug, Clone, Copy)]
pub struct HonestPermOracle {
    pub params: PermParams,
}

impl Oracle for HonestPermOracle {
    fn answer(&mut self, query: &Bitstring) -> bool {
        match self.params.decode(query) {
            Some((k, matrix, bit_idx)) => {
                (perm_mod_p(&matrix, k, self.params.p) >> bit_idx) & 1 == 1
            }
            None => false,
        }
    }
}

/// The permanent-bit instance checker.
#[derive(Debug, Clone, Copy)]
pub struct PermChecker {
    params: PermParams,
}

/// Build the checker for matrices up to `side` over GF(p).
pub fn perm_checker(side: usize, p: u64) -> Result<PermChecker, CheckerError> {
    Ok(PermChecker {
        params: PermParams::new(side, p)?,
    })
}

impl PermChecker {
    pub fn params(&self) -> PermParams {
        self.params
    }

    /// Read the oracle's claimed value of a matrix, one query per bit.
    /// Claims that do not name a field element are rejected.
    fn oracle_value(&self, matrix: &[u64], k: usize, oracle: &mut dyn Oracle) -> Option<u64> {
        let mut v = 0u64;
        for j in 0..self.params.value_bits() {
            let q = self.params.encode(k, matrix, j);
            if oracle.answer(&q) {
                v |= 1 << j;
            }
        }
        (v < self.params.p).then_some(v)
    }

    /// Entries of the curve matrix D(t): the Lagrange combination of the k
    /// first-row minors through interpolation nodes 0..k-1.
    fn curve_matrix(&self, minors: &[Vec<u64>], t: u64) -> Vec<u64> {
        let p = self.params.p;
        let k = minors.len();
        let dim = minors[0].len();
        // Lagrange basis weights L_j(t) for nodes 0..k-1.
        let weights: Vec<u64> = (0..k as u64)
            .map(|j| {
                let mut num = 1u64;
                let mut den = 1u64;
                for i in 0..k as u64 {
                    if i != j {
                        num = num * ((t + p - i % p) % p) % p;
                        den = den * ((j + p - i) % p) % p;
                    }
                }
                num * mod_inverse(den, p) % p
            })
            .collect();
        (0..dim)
            .map(|e| {
                minors
                    .iter()
                    .zip(&weights)
                    .fold(0u64, |acc, (m, &w)| (acc + m[e] * w) % p)
            })
            .collect()
    }

    /// Verify the oracle's claimed permanent of a k x k matrix; `None` means
    /// an inconsistency was caught.
    fn verified_value(
        &self,
        matrix: &[u64],
        k: usize,
        oracle: &mut dyn Oracle,
        rand: &mut dyn CheckerRandom,
    ) -> Option<u64> {
        let p = self.params.p;
        if k == 1 {
            return Some(matrix[0] % p);
        }
        let claimed = self.oracle_value(matrix, k, oracle)?;
        let minors: Vec<Vec<u64>> = (0..k).map(|j| delete_row0_col(matrix, k, j)).collect();
        // perm(D(t)) has degree at most (k-1)^2 in t.
        let deg = (k - 1) * (k - 1);
        let mut points = Vec::with_capacity(deg + 1);
        for t in 0..=deg as u64 {
            let d_t = self.curve_matrix(&minors, t);
            let v = self.oracle_value(&d_t, k - 1, oracle)?;
            points.push((t, v));
        }
        let poly = interpolate(&points, p);
        // Cofactor identity at this level: the claimed permanent must match
        // the claimed minor values, which are the curve at the nodes.
        let cofactor = (0..k).fold(0u64, |acc, j| (acc + matrix[j] * points[j].1) % p);
        if claimed != cofactor {
            return None;
        }
        // Spot-check the claimed curve polynomial one level down.
        let t_star = rand.below(p);
        let d_star = self.curve_matrix(&minors, t_star);
        let w = self.verified_value(&d_star, k - 1, oracle, rand)?;
        if w != eval_poly(&poly, t_star, p) {
            return None;
        }
        Some(claimed)
    }
}

impl InstanceChecker for PermChecker {
    fn query_len(&self, _input_len: usize) -> usize {
        self.params.frame_len()
    }

    fn decide(
        &self,
        x: &Bitstring,
        oracle: &mut dyn Oracle,
        rand: &mut dyn CheckerRandom,
    ) -> Verdict {
        // Malformed inputs are outside the language; 0 is the right answer
        // and needs no oracle.
        let Some((k, matrix, bit_idx)) = self.params.decode(x) else {
            return Verdict::Value(false);
        };
        match self.verified_value(&matrix, k, oracle, rand) {
            Some(v) => Verdict::Value((v >> bit_idx) & 1 == 1),
            None => Verdict::Fail,
        }
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p.
    crate::derand::pit::pow_mod(a, p - 2, p)
}

/// Coefficients (low to high) of the unique polynomial of degree < points.len()
/// through the given points.
fn interpolate(points: &[(u64, u64)], p: u64) -> Vec<u64> {
    let n = points.len();
    let mut coeffs = vec![0u64; n];
    for (j, &(xj, yj)) in points.iter().enumerate() {
        // Basis polynomial L_j as coefficients, times yj.
        let mut basis = vec![0u64; n];
        basis[0] = 1;
        let mut deg = 0usize;
        let mut den = 1u64;
        for (i, &(xi, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            // basis *= (x - xi)
            let neg_xi = (p - xi % p) % p;
            let mut next = vec![0u64; n];
            for d in 0..=deg {
                next[d + 1] = (next[d + 1] + basis[d]) % p;
                next[d] = (next[d] + basis[d] * neg_xi) % p;
            }
            basis = next;
            deg += 1;
            den = den * ((xj + p - xi) % p) % p;
        }
        let scale = yj % p * mod_inverse(den, p) % p;
        for d in 0..n {
            coeffs[d] = (coeffs[d] + basis[d] * scale) % p;
        }
    }
    coeffs
}

fn eval_poly(coeffs: &[u64], x: u64, p: u64) -> u64 {
    coeffs
        .iter()
        .rev()
        .fold(0u64, |acc, &c| (acc * (x % p) + c) % p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::oracles::{Constant, FlipAll};
    use crate::checker::{run_checker, ChoiceTape};
    use crate::rng::{Rng, RngStream};

    #[test]
    fn permanent_small_cases() {
        assert_eq!(perm_mod_p(&[3], 1, 5), 3);
        // [[1,2],[3,4]]: perm = 1*4 + 2*3 = 10.
        assert_eq!(perm_mod_p(&[1, 2, 3, 4], 2, 11), 10);
        // 3x3 all-ones: perm = 3! = 6.
        assert_eq!(perm_mod_p(&[1; 9], 3, 7), 6);
    }

    #[test]
    fn frame_roundtrip_and_padding_checks() {
        let params = PermParams::new(2, 5).unwrap();
        assert_eq!(params.value_bits(), 3);
        assert_eq!(params.frame_len(), 3 + 4 * 3 + 2);
        let q = params.encode(2, &[1, 2, 3, 4], 1);
        assert_eq!(params.decode(&q), Some((2, vec![1, 2, 3, 4], 1)));
        // 1x1 sub-instances live in the same frame.
        let q1 = params.encode(1, &[4], 0);
        assert_eq!(q1.len(), params.frame_len());
        assert_eq!(params.decode(&q1), Some((1, vec![4], 0)));
        // Dirty padding is malformed.
        let mut dirty = params.encode(1, &[4], 0);
        dirty.set(3 + 2 * 3, true);
        assert_eq!(params.decode(&dirty), None);
    }

    #[test]
    fn precondition_requires_enough_field_points() {
        // side 5 needs p > 16.
        assert!(PermParams::new(5, 13).is_err());
        assert!(PermParams::new(5, 17).is_ok());
        assert!(PermParams::new(2, 5).is_ok());
        assert!(PermParams::new(3, 4).is_err());
    }

    #[test]
    fn one_by_one_instances_need_no_oracle() {
        let checker = perm_checker(2, 5).unwrap();
        let params = checker.params();
        let x = params.encode(1, &[3], 1);
        // Even a lying oracle cannot touch a 1x1 verification.
        let mut oracle = Constant(true);
        let mut rng = Rng::new(0, "perm");
        let v = run_checker(&checker, &mut oracle, &x, &mut rng).unwrap();
        assert_eq!(v, Verdict::Value((3u64 >> 1) & 1 == 1));
    }

    #[test]
    fn honest_oracle_is_always_correct_for_every_randomness() {
        let checker = perm_checker(2, 5).unwrap();
        let params = checker.params();
        for mval in 0..625u64 {
            let m = [mval % 5, mval / 5 % 5, mval / 25 % 5, mval / 125 % 5];
            let truth = perm_mod_p(&m, 2, 5);
            for bit_idx in 0..params.value_bits() {
                let x = params.encode(2, &m, bit_idx);
                for t_star in 0..5u64 {
                    let mut oracle = HonestPermOracle { params };
                    let mut tape = ChoiceTape::new(vec![t_star]);
                    let v = run_checker(&checker, &mut oracle, &x, &mut tape).unwrap();
                    assert_eq!(v, Verdict::Value((truth >> bit_idx) & 1 == 1));
                }
            }
        }
    }

    #[test]
    fn honest_three_by_three_sampled_inputs_all_randomness() {
        let checker = perm_checker(3, 7).unwrap();
        let params = checker.params();
        let stream = RngStream::new(7, "perm-3x3");
        for trial in 0..150u64 {
            let sub = stream.derive_u64(trial);
            let m: Vec<u64> = (0..9).map(|i| sub.at(i) % 7).collect();
            let truth = perm_mod_p(&m, 3, 7);
            let bit_idx = (sub.at(100) % 3) as usize;
            let x = params.encode(3, &m, bit_idx);
            // Two levels of recursion: enumerate both random points.
            for t1 in 0..7u64 {
                for t2 in 0..7u64 {
                    let mut oracle = HonestPermOracle { params };
                    let mut tape = ChoiceTape::new(vec![t1, t2]);
                    let v = run_checker(&checker, &mut oracle, &x, &mut tape).unwrap();
                    assert_eq!(v, Verdict::Value((truth >> bit_idx) & 1 == 1));
                }
            }
        }
    }

    /// Measured wrong-non-fail rate over the full 2x2 GF(5) instance space
    /// and full checker randomness, for one adversarial oracle.
    fn wrong_rate_2x2<F>(mut make_oracle: F) -> f64
    where
        F: FnMut() -> Box<dyn crate::checker::Oracle>,
    {
        let checker = perm_checker(2, 5).unwrap();
        let params = checker.params();
        let mut wrong = 0u64;
        let mut total = 0u64;
        for mval in 0..625u64 {
            let m = [mval % 5, mval / 5 % 5, mval / 25 % 5, mval / 125 % 5];
            let truth = perm_mod_p(&m, 2, 5);
            for bit_idx in 0..params.value_bits() {
                let x = params.encode(2, &m, bit_idx);
                let f = (truth >> bit_idx) & 1 == 1;
                for t_star in 0..5u64 {
                    let mut oracle = make_oracle();
                    let mut tape = ChoiceTape::new(vec![t_star]);
                    let v = run_checker(&checker, oracle.as_mut(), &x, &mut tape).unwrap();
                    total += 1;
                    if let Verdict::Value(got) = v {
                        if got != f {
                            wrong += 1;
                        }
                    }
                }
            }
        }
        wrong as f64 / total as f64
    }

    #[test]
    fn adversarial_oracles_stay_under_one_quarter() {
        let params = PermParams::new(2, 5).unwrap();
        let flip_all = wrong_rate_2x2(|| Box::new(FlipAll(HonestPermOracle { params })));
        assert!(flip_all <= 0.25, "flip-all wrong rate {flip_all}");
        let const0 = wrong_rate_2x2(|| Box::new(Constant(false)));
        assert!(const0 <= 0.25, "constant-0 wrong rate {const0}");
    }
}
