//! Parity-restricted sets and the F2 algorithms used on them.

use num_bigint::BigUint;
use num_integer::binomial;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};
use crate::statevector::BitPredicate;

/// Largest `n` for which an explicit set or exhaustive enumeration is
/// supported.
pub const EXPLICIT_MAX_BITS: usize = 63;

/// Largest `n` for which covering checks allocate a `2^n` bitmap.
const COVER_MAX_BITS: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SetForm {
    Explicit { members: Vec<u64> },
    HammingSlice { weight: usize },
    Singleton { member: u64 },
}

/// A nonempty set of `n`-bit strings of one common Hamming-weight parity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityRestrictedSet {
    n: usize,
    #[serde(flatten)]
    form: SetForm,
    parity: u8,
}

impl ParityRestrictedSet {
    /// Validate an explicit list. Members are kept sorted.
    pub fn explicit(n: usize, members: Vec<u64>) -> Result<Self> {
        if n == 0 || n > EXPLICIT_MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "explicit sets need 1 <= n <= {EXPLICIT_MAX_BITS}, got {n}"
            )));
        }
        let first = *members.first().ok_or(Error::EmptySet)?;
        let mut sorted = members;
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateMember(bits::format(w[0], n)));
            }
        }
        if let Some(&bad) = sorted.iter().find(|&&m| m >> n != 0) {
            return Err(Error::BadBitstring {
                text: format!("{bad:b}"),
                n,
            });
        }
        let parity = (first.count_ones() & 1) as u8;
        if let Some(&other) = sorted.iter().find(|&&m| (m.count_ones() & 1) as u8 != parity) {
            return Err(Error::MixedParity {
                first: bits::format(first, n),
                second: bits::format(other, n),
            });
        }
        Ok(Self {
            n,
            form: SetForm::Explicit { members: sorted },
            parity,
        })
    }

    pub fn from_bitstrings<S: AsRef<str>>(n: usize, strings: &[S]) -> Result<Self> {
        let members = strings
            .iter()
            .map(|s| bits::parse(s.as_ref(), n))
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(n, members)
    }

    pub fn hamming_slice(n: usize, weight: usize) -> Result<Self> {
        if n == 0 || weight > n {
            return Err(Error::InvalidParameter(format!(
                "slice weight {weight} not in 0..={n}"
            )));
        }
        Ok(Self {
            n,
            form: SetForm::HammingSlice { weight },
            parity: (weight & 1) as u8,
        })
    }

    pub fn singleton(n: usize, member: u64) -> Result<Self> {
        if n == 0 || n > EXPLICIT_MAX_BITS || member >> n != 0 {
            return Err(Error::BadBitstring {
                text: format!("{member:b}"),
                n,
            });
        }
        Ok(Self {
            n,
            form: SetForm::Singleton { member },
            parity: (member.count_ones() & 1) as u8,
        })
    }

    /// Parse `slice:n:w`, `single:<bits>`, or bitstrings separated by
    /// newlines or commas.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("slice:") {
            let mut it = rest.split(':');
            let parse_num = |s: Option<&str>| -> Result<usize> {
                s.and_then(|v| v.trim().parse().ok()).ok_or_else(|| {
                    Error::InvalidParameter(format!("bad slice literal {text:?}, expected slice:n:w"))
                })
            };
            let n = parse_num(it.next())?;
            let w = parse_num(it.next())?;
            return Self::hamming_slice(n, w);
        }
        if let Some(rest) = text.strip_prefix("single:") {
            let rest = rest.trim();
            return Self::singleton(rest.len(), bits::parse(rest, rest.len())?);
        }
        let strings: Vec<&str> = text
            .split(['\n', ','])
            .map(str::trim)
            .filter(|s| !s.is_empty() && !s.starts_with('#'))
            .collect();
        let n = strings.first().ok_or(Error::EmptySet)?.len();
        Self::from_bitstrings(n, &strings)
    }

    /// Text form accepted by [`ParityRestrictedSet::parse`].
    pub fn to_text(&self) -> String {
        match &self.form {
            SetForm::HammingSlice { weight } => format!("slice:{}:{weight}", self.n),
            SetForm::Singleton { member } => format!("single:{}", bits::format(*member, self.n)),
            SetForm::Explicit { members } => members
                .iter()
                .map(|&m| bits::format(m, self.n))
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn form(&self) -> &SetForm {
        &self.form
    }

    pub fn size(&self) -> BigUint {
        match &self.form {
            SetForm::Explicit { members } => BigUint::from(members.len()),
            SetForm::HammingSlice { weight } => binomial(BigUint::from(self.n), BigUint::from(*weight)),
            SetForm::Singleton { .. } => BigUint::from(1u8),
        }
    }

    /// Size as `u64`, failing when it does not fit.
    pub fn size_u64(&self) -> Result<u64> {
        u64::try_from(self.size())
            .map_err(|_| Error::InvalidParameter("set size does not fit in 64 bits".into()))
    }

    pub fn contains(&self, x: u64) -> bool {
        match &self.form {
            SetForm::Explicit { members } => members.binary_search(&x).is_ok(),
            SetForm::HammingSlice { weight } => x.count_ones() as usize == *weight,
            SetForm::Singleton { member } => *member == x,
        }
    }

    /// All members in increasing order.
    pub fn members(&self) -> Result<Vec<u64>> {
        match &self.form {
            SetForm::Explicit { members } => Ok(members.clone()),
            SetForm::Singleton { member } => Ok(vec![*member]),
            SetForm::HammingSlice { weight } => {
                if self.n > COVER_MAX_BITS {
                    return Err(Error::BudgetExceeded {
                        what: "slice enumeration".into(),
                        needed: self.n,
                        limit: COVER_MAX_BITS,
                    });
                }
                Ok((0..1u64 << self.n)
                    .filter(|x| x.count_ones() as usize == *weight)
                    .collect())
            }
        }
    }

    /// The membership indicator as a predicate for `U_S`.
    pub fn to_predicate(&self) -> Result<BitPredicate> {
        match &self.form {
            SetForm::Explicit { members } => BitPredicate::truth_set(self.n, members.iter().copied()),
            SetForm::Singleton { member } => BitPredicate::truth_set(self.n, [*member]),
            SetForm::HammingSlice { weight } => Ok(BitPredicate::Exactly {
                arity: self.n,
                k: *weight,
            }),
        }
    }
}

/// Linearly independent vectors over F2 (bit 0 of the string is the MSB).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2Basis {
    pub n: usize,
    pub vectors: Vec<u64>,
}

impl F2Basis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Incremental echelon form, pivot on the lowest string index (highest
/// bit) first.
#[derive(Debug, Clone, Default)]
struct Echelon {
    rows: Vec<u64>,
}

impl Echelon {
    fn reduce(&self, mut v: u64) -> u64 {
        for &r in &self.rows {
            let lead = 63 - r.leading_zeros();
            if v >> lead & 1 == 1 {
                v ^= r;
            }
        }
        v
    }

    /// Insert `v`; true when it was independent.
    fn insert(&mut self, v: u64) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let pos = self
            .rows
            .iter()
            .position(|&x| x.leading_zeros() > r.leading_zeros())
            .unwrap_or(self.rows.len());
        self.rows.insert(pos, r);
        true
    }
}

pub fn rank(vectors: &[u64]) -> usize {
    let mut e = Echelon::default();
    vectors.iter().filter(|&&v| e.insert(v)).count()
}

/// All `2^d` combinations in Gray-code order, starting at `0`.
pub fn span_enumerate(basis: &F2Basis) -> Result<Vec<u64>> {
    if basis.len() > 20 {
        return Err(Error::InvalidParameter(format!(
            "span of {} vectors is too large to enumerate",
            basis.len()
        )));
    }
    let mut out = Vec::with_capacity(1 << basis.len());
    let mut v = 0u64;
    out.push(v);
    for i in 1u64..(1 << basis.len()) {
        v ^= basis.vectors[i.trailing_zeros() as usize];
        out.push(v);
    }
    Ok(out)
}

struct Cover {
    n: usize,
    parity: u8,
    bitmap: Vec<u64>,
}

impl Cover {
    fn new(n: usize, parity: u8) -> Self {
        Self {
            n,
            parity,
            bitmap: vec![0; (1usize << n).div_ceil(64)],
        }
    }

    fn set(&mut self, x: u64) {
        self.bitmap[(x / 64) as usize] |= 1 << (x % 64);
    }

    fn has(&self, x: u64) -> bool {
        self.bitmap[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    fn count(&self) -> u64 {
        self.bitmap.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Smallest string of the parity class not yet covered.
    fn first_gap(&self) -> Option<u64> {
        (0..1u64 << self.n).find(|&x| (x.count_ones() & 1) as u8 == self.parity && !self.has(x))
    }
}

fn cover_of(n: usize, parity: u8, members: &[u64], span: &[u64]) -> Cover {
    let mut c = Cover::new(n, parity);
    for &s in members {
        for &y in span {
            c.set(s ^ y);
        }
    }
    c
}

/// True iff `S XOR Span(basis)` is exactly the parity class of `S`.
pub fn covers_parity_class(set: &ParityRestrictedSet, basis: &F2Basis) -> Result<bool> {
    let n = set.n();
    if n > COVER_MAX_BITS {
        return Err(Error::BudgetExceeded {
            what: "covering check".into(),
            needed: n,
            limit: COVER_MAX_BITS,
        });
    }
    if basis.vectors.iter().any(|t| t.count_ones() % 2 != 0) {
        return Ok(false);
    }
    let members = set.members()?;
    let span = span_enumerate(basis)?;
    let cover = cover_of(n, set.parity(), &members, &span);
    Ok(cover.count() == 1u64 << (n - 1))
}

/// Even-weight vectors `t_1..t_d` with `S XOR Span(t)` equal to the parity
/// class of `S`; `d <= c - 1` whenever such a family exists, else `d = c`.
///
/// The linear-algebra completion of `S` (first bit flipped when the parity
/// is odd) to the even-weight subspace is tried first. Spanning does not
/// imply covering, so when that candidate fails a complete search over
/// extensions follows: the next vector must cover the smallest uncovered
/// string, hence lies in `{z XOR s : s in S}`. Some sets of size `2^{n-c}`
/// admit no family of `c - 1` vectors; the search then allows `c`.
pub fn subs_complement_basis(set: &ParityRestrictedSet, c: usize) -> Result<F2Basis> {
    let n = set.n();
    if c == 0 || c > 6 {
        return Err(Error::InvalidParameter(format!("c must be in 1..=6, got {c}")));
    }
    if !(2..=COVER_MAX_BITS).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "covering search needs 2 <= n <= {COVER_MAX_BITS}, got {n}"
        )));
    }
    let needed = BigUint::from(1u8) << n.saturating_sub(c);
    if set.size() < needed {
        return Err(Error::SetTooSmall {
            size: set.size().to_string(),
            needed: needed.to_string(),
        });
    }
    let members = set.members()?;
    let shift = if set.parity() == 1 { bits::mask(n, 0) } else { 0 };
    let mut ech = Echelon::default();
    let r = members.iter().filter(|&&s| ech.insert(s ^ shift)).count();
    if r + c < n {
        return Err(Error::SpanDeficiency { rank: r, needed: n - c });
    }
    let mut completion = Vec::new();
    for i in 1..n {
        let e = bits::mask(n, 0) | bits::mask(n, i);
        if ech.insert(e) {
            completion.push(e);
        }
    }
    let candidate = F2Basis {
        n,
        vectors: completion,
    };
    if candidate.len() < c && covers_parity_class(set, &candidate)? {
        return Ok(candidate);
    }
    for budget in [c - 1, c] {
        let mut chosen = Vec::new();
        if search_cover(n, set.parity(), &members, budget, &mut chosen) {
            return Ok(F2Basis { n, vectors: chosen });
        }
    }
    Err(Error::NoCovering(c))
}

fn search_cover(n: usize, parity: u8, members: &[u64], budget: usize, chosen: &mut Vec<u64>) -> bool {
    let span = span_enumerate(&F2Basis {
        n,
        vectors: chosen.clone(),
    })
    .expect("at most 6 vectors");
    let cover = cover_of(n, parity, members, &span);
    let class = 1u64 << (n - 1);
    let have = cover.count();
    if have == class {
        return true;
    }
    // Each added vector at most doubles the cover.
    if budget == 0 || have << budget < class {
        return false;
    }
    let z = cover.first_gap().expect("cover is incomplete");
    let mut ech = Echelon::default();
    for &t in chosen.iter() {
        ech.insert(t);
    }
    let mut seen = std::collections::HashSet::new();
    for &s in members {
        let t = z ^ s;
        // Candidates equal modulo the current span give the same cover.
        if !seen.insert(ech.reduce(t)) {
            continue;
        }
        chosen.push(t);
        if search_cover(n, parity, members, budget - 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// An element `s` and indices on which `s` is the unique agreeing member.
///
/// Repeatedly splits on the first index where the surviving members
/// differ and keeps the smaller half; on a tie the half holding the
/// lexicographically smallest member (the 0-half) is kept.
pub fn restrict_fixing_indices(set: &ParityRestrictedSet) -> Result<(u64, Vec<usize>)> {
    restrict_members(set.n(), &set.members()?)
}

/// [`restrict_fixing_indices`] for an arbitrary nonempty set of distinct
/// `n`-bit strings (no parity requirement).
pub fn restrict_members(n: usize, members: &[u64]) -> Result<(u64, Vec<usize>)> {
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut cur = members.to_vec();
    cur.sort_unstable();
    cur.dedup();
    let mut indices = Vec::new();
    while cur.len() > 1 {
        let i = (0..n)
            .find(|&i| {
                let b = bits::bit(cur[0], n, i);
                cur.iter().any(|&x| bits::bit(x, n, i) != b)
            })
            .expect("distinct members differ somewhere");
        let (ones, zeros): (Vec<u64>, Vec<u64>) = cur.into_iter().partition(|&x| bits::bit(x, n, i));
        cur = if ones.len() < zeros.len() { ones } else { zeros };
        indices.push(i);
    }
    Ok((cur[0], indices))
}

/// Uniqueness check for [`restrict_fixing_indices`] by scanning the set.
pub fn is_unique_completion(set: &ParityRestrictedSet, s: u64, indices: &[usize]) -> Result<bool> {
    let n = set.n();
    let agree = |x: u64| indices.iter().all(|&i| bits::bit(x, n, i) == bits::bit(s, n, i));
    let members = set.members()?;
    Ok(members.contains(&s) && members.iter().filter(|&&x| agree(x)).count() == 1)
}

pub mod sampling {
    //! Seeded generators of parity-restricted sets for randomized suites.
    use super::*;

    /// `size` distinct strings of the given parity, uniformly at random.
    pub fn random_set<R: Rng>(rng: &mut R, n: usize, size: usize, parity: u8) -> Result<ParityRestrictedSet> {
        let class = 1u64 << (n - 1);
        if size == 0 || size as u64 > class {
            return Err(Error::InvalidParameter(format!(
                "cannot draw {size} strings from a class of {class}"
            )));
        }
        let mut members = std::collections::BTreeSet::new();
        while members.len() < size {
            let mut x = rng.gen_range(0..1u64 << n);
            if (x.count_ones() & 1) as u8 != parity {
                x ^= 1;
            }
            members.insert(x);
        }
        ParityRestrictedSet::explicit(n, members.into_iter().collect())
    }

    /// A set of size at least `2^{n-c}` that is covered by some span of at
    /// most `c - 1` even-weight vectors: one random representative of each
    /// coset of a random subspace, plus random extras.
    pub fn planted_covering_set<R: Rng>(rng: &mut R, n: usize, c: usize, parity: u8) -> Result<ParityRestrictedSet> {
        let d = rng.gen_range(0..c.min(n - 1));
        let mut ech = Echelon::default();
        let mut basis = Vec::new();
        while basis.len() < d {
            let mut t = rng.gen_range(1..1u64 << n);
            if t.count_ones() % 2 == 1 {
                t ^= 1;
            }
            if t != 0 && ech.insert(t) {
                basis.push(t);
            }
        }
        let span = span_enumerate(&F2Basis { n, vectors: basis })?;
        let mut seen = std::collections::HashSet::new();
        let mut members = std::collections::BTreeSet::new();
        let mut class: Vec<u64> = (0..1u64 << n)
            .filter(|x| (x.count_ones() & 1) as u8 == parity)
            .collect();
        class.shuffle(rng);
        for &x in &class {
            let key = span.iter().map(|&y| x ^ y).min().expect("span holds 0");
            if seen.insert(key) {
                members.insert(x);
            }
        }
        let target = (1usize << (n - c)).max(members.len());
        let room = class.len() - target;
        let total = target + rng.gen_range(0..=room / 4);
        for &x in &class {
            if members.len() >= total {
                break;
            }
            members.insert(x);
        }
        ParityRestrictedSet::explicit(n, members.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validate_examples() {
        let s = ParityRestrictedSet::from_bitstrings(2, &["11", "00"]).unwrap();
        assert_eq!(s.parity(), 0);
        assert!(matches!(
            ParityRestrictedSet::from_bitstrings(2, &["10", "11"]),
            Err(Error::MixedParity { .. })
        ));
        assert!(matches!(
            ParityRestrictedSet::from_bitstrings(2, &["11", "11"]),
            Err(Error::DuplicateMember(_))
        ));
        assert!(matches!(ParityRestrictedSet::explicit(3, vec![]), Err(Error::EmptySet)));
        assert!(ParityRestrictedSet::from_bitstrings(2, &["101"]).is_err());
        let slice = ParityRestrictedSet::hamming_slice(8, 4).unwrap();
        assert_eq!(slice.parity(), 0);
        assert_eq!(slice.size(), BigUint::from(70u32));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(
            ParityRestrictedSet::parse("slice:8:4").unwrap(),
            ParityRestrictedSet::hamming_slice(8, 4).unwrap()
        );
        let s = ParityRestrictedSet::parse("0011\n1100\n").unwrap();
        assert_eq!(s.members().unwrap(), vec![0b0011, 0b1100]);
        assert_eq!(ParityRestrictedSet::parse(&s.to_text()).unwrap(), s);
        let one = ParityRestrictedSet::parse("single:111").unwrap();
        assert_eq!(one.size(), BigUint::from(1u8));
        assert_eq!(one.parity(), 1);
        assert!(ParityRestrictedSet::parse("slice:4").is_err());
    }

    #[test]
    fn subs_examples() {
        let n = 6;
        let evens: Vec<u64> = (0..1u64 << n).filter(|x| x.count_ones() % 2 == 0).collect();
        let all = ParityRestrictedSet::explicit(n, evens).unwrap();
        assert!(subs_complement_basis(&all, 1).unwrap().is_empty());

        let minus: Vec<u64> = (0..16u64)
            .filter(|x| x.count_ones() % 2 == 0 && *x != 0b1100)
            .collect();
        let s = ParityRestrictedSet::explicit(4, minus).unwrap();
        assert!(matches!(subs_complement_basis(&s, 1), Err(Error::SetTooSmall { .. })));
    }

    #[test]
    fn spanning_set_that_does_not_cover() {
        // Rank already n-1, so no completion vectors, yet S alone misses
        // half of the even class; one extra vector repairs it.
        let s = ParityRestrictedSet::from_bitstrings(4, &["0000", "1100", "1010", "1001"]).unwrap();
        assert!(!covers_parity_class(&s, &F2Basis { n: 4, vectors: vec![] }).unwrap());
        let b = subs_complement_basis(&s, 2).unwrap();
        assert_eq!(b.len(), 1);
        assert!(covers_parity_class(&s, &b).unwrap());
    }

    #[test]
    fn size_bound_forces_rank() {
        // 2^{n-c} distinct vectors cannot fit in a space of dimension < n-c,
        // so the rank precondition follows from the size precondition.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 3..=9 {
            for c in 1..=3usize.min(n - 1) {
                let s = sampling::random_set(&mut rng, n, 1 << (n - c), 1).unwrap();
                let flipped: Vec<u64> = s.members().unwrap().iter().map(|x| x ^ bits::mask(n, 0)).collect();
                assert!(rank(&flipped) >= n - c);
            }
        }
    }

    #[test]
    fn planted_sets_are_covered() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = 4 + trial % 5;
            let c = 1 + trial % 3;
            let parity = (trial % 2) as u8;
            let s = sampling::planted_covering_set(&mut rng, n, c, parity).unwrap();
            assert_eq!(s.parity(), parity);
            let b = subs_complement_basis(&s, c).unwrap();
            assert!(b.len() < c);
            assert!(covers_parity_class(&s, &b).unwrap());
        }
    }

    #[test]
    fn restrict_examples() {
        let one = ParityRestrictedSet::from_bitstrings(3, &["101"]).unwrap();
        assert_eq!(restrict_fixing_indices(&one).unwrap(), (0b101, vec![]));
        let (e, idx) = restrict_members(2, &[0b00, 0b01]).unwrap();
        assert_eq!((e, idx), (0b00, vec![1]));
        let s = ParityRestrictedSet::from_bitstrings(2, &["00", "11"]).unwrap();
        let (e, idx) = restrict_fixing_indices(&s).unwrap();
        assert_eq!((e, idx.clone()), (0b00, vec![0]));
        assert!(is_unique_completion(&s, e, &idx).unwrap());
    }

    #[test]
    fn span_enumeration() {
        assert_eq!(span_enumerate(&F2Basis { n: 3, vectors: vec![] }).unwrap(), vec![0]);
        assert_eq!(span_enumerate(&F2Basis { n: 3, vectors: vec![5] }).unwrap(), vec![0, 5]);
        let s = span_enumerate(&F2Basis { n: 3, vectors: vec![5, 3] }).unwrap();
        assert_eq!(s, vec![0, 5, 6, 3]);
        assert!(span_enumerate(&F2Basis { n: 30, vectors: (0..21).map(|i| 1 << i).collect() }).is_err());
    }

    #[test]
    fn rank_counts() {
        assert_eq!(rank(&[0b11, 0b01, 0b10]), 2);
        assert_eq!(rank(&[0, 0]), 0);
    }

    /// A set of size `2^{n-2}` that no single vector covers; two do.
    #[test]
    fn some_sets_need_c_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let set = (0..100)
            .map(|_| sampling::random_set(&mut rng, n, 16, 0).unwrap())
            .find(|s| subs_complement_basis(s, 2).unwrap().len() == 2)
            .expect("a set needing two vectors");
        let members = set.members().unwrap();
        for t in (0..1u64 << n).filter(|t| t.count_ones() % 2 == 0) {
            let mut cover: Vec<u64> = members.iter().flat_map(|&s| [s, s ^ t]).collect();
            cover.sort_unstable();
            cover.dedup();
            assert!(cover.len() < 32);
        }
    }
}
