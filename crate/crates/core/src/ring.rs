//! The integral group ring Z[pi], its twisted bimodule Z[pi]^phi, the shadow
//! quotient by p.phi(r) ~ r.p, semiconjugacy-class reduction and mod-K
//! projection of shadows.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{
    multiply, GroupElement, GroupEndomorphism, GroupError, GroupMap, GroupModel,
};
use crate::snf::{smith, SmithForm};

#[derive(Debug, Error)]
pub enum RingError {
    #[error("model mismatch between ring elements")]
    ModelMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("unsupported reduction: {0}")]
    UnsupportedReduction(String),
    #[error("shadow is formal (unreduced); {0}")]
    FormalShadow(String),
    #[error("invalid quotient map: {0}")]
    InvalidQuotient(String),
    #[error("integer overflow in ring arithmetic")]
    Overflow,
}

pub type RResult<T> = Result<T, RingError>;

fn iadd(a: i64, b: i64) -> RResult<i64> {
    a.checked_add(b).ok_or(RingError::Overflow)
}

fn imul(a: i64, b: i64) -> RResult<i64> {
    a.checked_mul(b).ok_or(RingError::Overflow)
}

/// Finite integer combination of group elements; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRingElement {
    pub model: Arc<GroupModel>,
    pub terms: BTreeMap<GroupElement, i64>,
}

impl GroupRingElement {
    pub fn zero(model: &Arc<GroupModel>) -> Self {
        GroupRingElement {
            model: model.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(model: &Arc<GroupModel>) -> Self {
        Self::basis(model, model.identity())
    }

    pub fn basis(model: &Arc<GroupModel>, g: GroupElement) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(g, 1);
        GroupRingElement {
            model: model.clone(),
            terms,
        }
    }

    pub fn from_terms(
        model: &Arc<GroupModel>,
        terms: impl IntoIterator<Item = (GroupElement, i64)>,
    ) -> RResult<Self> {
        let mut out = Self::zero(model);
        for (g, c) in terms {
            out.add_term(g, c)?;
        }
        Ok(out)
    }

    pub fn add_term(&mut self, g: GroupElement, c: i64) -> RResult<()> {
        if c == 0 {
            return Ok(());
        }
        let entry = self.terms.entry(g);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let n = iadd(*o.get(), c)?;
                if n == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = n;
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn neg(&self) -> Self {
        GroupRingElement {
            model: self.model.clone(),
            terms: self.terms.iter().map(|(g, c)| (g.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: i64) -> RResult<Self> {
        let mut out = Self::zero(&self.model);
        for (g, c) in &self.terms {
            out.add_term(g.clone(), imul(*c, k)?)?;
        }
        Ok(out)
    }

    /// Apply an endomorphism to every basis element (the twisted element x^phi).
    pub fn twist(&self, phi: &GroupEndomorphism) -> RResult<Self> {
        if phi.model != self.model {
            return Err(RingError::ModelMismatch);
        }
        let mut out = Self::zero(&self.model);
        for (g, c) in &self.terms {
            out.add_term(phi.apply(g)?, *c)?;
        }
        Ok(out)
    }
}

pub fn ring_add(x: &GroupRingElement, y: &GroupRingElement) -> RResult<GroupRingElement> {
    if x.model != y.model {
        return Err(RingError::ModelMismatch);
    }
    let mut out = x.clone();
    for (g, c) in &y.terms {
        out.add_term(g.clone(), *c)?;
    }
    Ok(out)
}

pub fn ring_sub(x: &GroupRingElement, y: &GroupRingElement) -> RResult<GroupRingElement> {
    ring_add(x, &y.neg())
}

/// Convolution product (sum a_i g_i)(sum b_j h_j) = sum a_i b_j (g_i h_j).
pub fn ring_mul(x: &GroupRingElement, y: &GroupRingElement) -> RResult<GroupRingElement> {
    if x.model != y.model {
        return Err(RingError::ModelMismatch);
    }
    let mut out = GroupRingElement::zero(&x.model);
    for (g, a) in &x.terms {
        for (h, b) in &y.terms {
            out.add_term(multiply(g, h, &x.model)?, imul(*a, *b)?)?;
        }
    }
    Ok(out)
}

/// The coefficient-sum ring map Z[pi] -> Z.
pub fn augment(x: &GroupRingElement) -> i64 {
    x.terms.values().sum()
}

/// Reduction strategy for semiconjugacy classes of one (model, phi) pair.
///
/// Supported: free-abelian with any phi (Smith normal form of I - A), finite
/// tables with any phi (orbit enumeration), free groups with phi = id
/// (cyclic words). Everything else stays formal.
pub enum SemiconjReducer {
    Abelian {
        snf: SmithForm,
        rank: usize,
    },
    FiniteOrbit {
        /// canonical representative per element index
        reps: Vec<usize>,
    },
    FreeConjugacy,
    Unsupported(String),
}

impl SemiconjReducer {
    pub fn new(model: &Arc<GroupModel>, phi: &GroupEndomorphism) -> Self {
        if phi.model != *model {
            return SemiconjReducer::Unsupported("phi over a different model".into());
        }
        match &**model {
            GroupModel::FreeAbelian { rank } => {
                let a = phi.abelian_matrix().expect("abelian endo has a matrix");
                // I - A
                let m: Vec<Vec<i64>> = (0..*rank)
                    .map(|i| {
                        (0..*rank)
                            .map(|j| if i == j { 1 - a[i][j] } else { -a[i][j] })
                            .collect()
                    })
                    .collect();
                SemiconjReducer::Abelian {
                    snf: smith(&m),
                    rank: *rank,
                }
            }
            GroupModel::Finite(t) => {
                let n = t.elements.len();
                let phi_of: Vec<usize> = (0..n)
                    .map(|i| match phi.apply(&GroupElement::Index(i)) {
                        Ok(GroupElement::Index(j)) => j,
                        _ => unreachable!(),
                    })
                    .collect();
                // orbit of g under g ~ beta . g . phi(beta)^-1
                let mut reps = vec![usize::MAX; n];
                for g in 0..n {
                    let mut best = usize::MAX;
                    for beta in 0..n {
                        let x = t.table[t.table[beta][g]][t.inverse[phi_of[beta]]];
                        best = best.min(x);
                    }
                    reps[g] = best;
                }
                SemiconjReducer::FiniteOrbit { reps }
            }
            GroupModel::Free { .. } => {
                if phi.is_identity() {
                    SemiconjReducer::FreeConjugacy
                } else {
                    SemiconjReducer::Unsupported(
                        "twisted conjugacy for free groups with phi != id".into(),
                    )
                }
            }
        }
    }

    pub fn supported(&self) -> bool {
        !matches!(self, SemiconjReducer::Unsupported(_))
    }

    pub fn class(&self, g: &GroupElement) -> RResult<GroupElement> {
        match self {
            SemiconjReducer::Abelian { snf, rank } => {
                let v = match g {
                    GroupElement::Vector(v) => v,
                    _ => return Err(RingError::ModelMismatch),
                };
                // y = U x; reduce y_i mod d_i; pull back through U^-1
                let y: Vec<BigInt> = (0..*rank)
                    .map(|i| {
                        (0..*rank)
                            .map(|j| &snf.u[i][j] * BigInt::from(v[j]))
                            .sum::<BigInt>()
                    })
                    .collect();
                let yhat: Vec<BigInt> = (0..*rank)
                    .map(|i| {
                        let d = &snf.diag[i];
                        if d.is_zero() {
                            y[i].clone()
                        } else {
                            let mut r = &y[i] % d;
                            if r.is_negative() {
                                r += d;
                            }
                            r
                        }
                    })
                    .collect();
                let rep: Vec<i64> = (0..*rank)
                    .map(|i| {
                        let x: BigInt = (0..*rank)
                            .map(|j| &snf.u_inv[i][j] * &yhat[j])
                            .sum();
                        i64::try_from(x).map_err(|_| RingError::Overflow)
                    })
                    .collect::<RResult<Vec<_>>>()?;
                Ok(GroupElement::Vector(rep))
            }
            SemiconjReducer::FiniteOrbit { reps } => match g {
                GroupElement::Index(i) => Ok(GroupElement::Index(
                    *reps.get(*i).ok_or(RingError::ModelMismatch)?,
                )),
                _ => Err(RingError::ModelMismatch),
            },
            SemiconjReducer::FreeConjugacy => {
                let w = match g {
                    GroupElement::Word(w) => w,
                    _ => return Err(RingError::ModelMismatch),
                };
                Ok(GroupElement::Word(least_cyclic_form(w)))
            }
            SemiconjReducer::Unsupported(why) => {
                Err(RingError::UnsupportedReduction(why.clone()))
            }
        }
    }
}

/// Canonical conjugacy representative of a free word: cyclically reduce, then
/// take the lexicographically least rotation of the letter sequence.
fn least_cyclic_form(w: &[(u32, i64)]) -> Vec<(u32, i64)> {
    // expand run-length pairs into single letters (+g / -g)
    let mut letters: Vec<i64> = Vec::new();
    for &(g, e) in w {
        let s = if e > 0 { g as i64 } else { -(g as i64) };
        for _ in 0..e.unsigned_abs() {
            letters.push(s);
        }
    }
    // cyclic reduction: strip matching first/last inverse pairs
    while letters.len() >= 2 && letters[0] == -letters[letters.len() - 1] {
        letters.remove(0);
        letters.pop();
    }
    if letters.is_empty() {
        return Vec::new();
    }
    let n = letters.len();
    let key = |l: i64| (l.unsigned_abs(), l < 0);
    let mut best: Option<Vec<i64>> = None;
    for r in 0..n {
        let rot: Vec<i64> = (0..n).map(|i| letters[(r + i) % n]).collect();
        if best
            .as_ref()
            .map(|b| {
                rot.iter().map(|&l| key(l)).collect::<Vec<_>>()
                    < b.iter().map(|&l| key(l)).collect::<Vec<_>>()
            })
            .unwrap_or(true)
        {
            best = Some(rot);
        }
    }
    // re-encode
    let mut out: Vec<(u32, i64)> = Vec::new();
    for l in best.unwrap() {
        let g = l.unsigned_abs() as u32;
        let e = l.signum();
        if let Some(last) = out.last_mut() {
            if last.0 == g && last.1.signum() == e {
                last.1 += e;
                continue;
            }
        }
        out.push((g, e));
    }
    out
}

pub fn semiconjugacy_class(
    g: &GroupElement,
    phi: &GroupEndomorphism,
) -> RResult<GroupElement> {
    SemiconjReducer::new(&phi.model, phi).class(g)
}

/// Integer combination of semiconjugacy classes; the target of every trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowElement {
    pub model: Arc<GroupModel>,
    pub phi: GroupEndomorphism,
    pub terms: BTreeMap<GroupElement, i64>,
    pub reduced: bool,
}

impl ShadowElement {
    pub fn zero(model: &Arc<GroupModel>, phi: &GroupEndomorphism) -> Self {
        ShadowElement {
            model: model.clone(),
            phi: phi.clone(),
            terms: BTreeMap::new(),
            reduced: true,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn augment(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn add(&self, other: &ShadowElement) -> RResult<ShadowElement> {
        if self.model != other.model || self.phi != other.phi {
            return Err(RingError::ModelMismatch);
        }
        let mut terms = self.terms.clone();
        for (g, c) in &other.terms {
            let e = terms.entry(g.clone()).or_insert(0);
            *e = iadd(*e, *c)?;
            if *e == 0 {
                terms.remove(g);
            }
        }
        Ok(ShadowElement {
            model: self.model.clone(),
            phi: self.phi.clone(),
            terms,
            // formal summands keep the sum formal
            reduced: self.reduced && other.reduced,
        })
    }

    pub fn neg(&self) -> ShadowElement {
        ShadowElement {
            model: self.model.clone(),
            phi: self.phi.clone(),
            terms: self.terms.iter().map(|(g, c)| (g.clone(), -c)).collect(),
            reduced: self.reduced,
        }
    }

    /// Number of classes with nonzero coefficient. Errors on formal shadows
    /// rather than under-counting.
    pub fn nonzero_classes(&self) -> RResult<usize> {
        if !self.reduced {
            return Err(RingError::FormalShadow(
                "reduce first (e.g. project mod K to an abelianization)".into(),
            ));
        }
        Ok(self.terms.len())
    }
}

/// Universal trace target: send each basis element to its semiconjugacy class
/// and merge coefficients. Falls back to a formal (unmerged) shadow when the
/// (model, phi) pair has no supported reduction.
pub fn shadow_project(x: &GroupRingElement, phi: &GroupEndomorphism) -> RResult<ShadowElement> {
    if phi.model != x.model {
        return Err(RingError::ModelMismatch);
    }
    let reducer = SemiconjReducer::new(&x.model, phi);
    let mut out = ShadowElement::zero(&x.model, phi);
    if reducer.supported() {
        for (g, c) in &x.terms {
            let rep = reducer.class(g)?;
            let e = out.terms.entry(rep).or_insert(0);
            *e = iadd(*e, *c)?;
        }
        out.terms.retain(|_, c| *c != 0);
        out.reduced = true;
    } else {
        out.terms = x.terms.clone();
        out.reduced = false;
    }
    Ok(out)
}

/// Push a shadow forward along a quotient pi -> pi/K and re-reduce there.
///
/// `phi_q` is the endomorphism induced on the quotient; it is validated to
/// commute with the projection on generators. Kernel generators, when
/// supplied, are checked to map to the identity and to stay in the kernel
/// under phi.
pub fn mod_k_project(
    s: &ShadowElement,
    q: &GroupMap,
    phi_q: &GroupEndomorphism,
    kernel_gens: Option<&[GroupElement]>,
) -> RResult<ShadowElement> {
    if q.src != s.model {
        return Err(RingError::InvalidQuotient("source model mismatch".into()));
    }
    if phi_q.model != q.dst {
        return Err(RingError::InvalidQuotient(
            "quotient endomorphism over the wrong model".into(),
        ));
    }
    // phi must descend: phi_q(q(g)) = q(phi(g)) on generators
    let gens: Vec<GroupElement> = match &*s.model {
        GroupModel::Free { rank } | GroupModel::FreeAbelian { rank } => (1..=*rank)
            .map(|i| s.model.generator(i))
            .collect::<Result<_, _>>()?,
        GroupModel::Finite(t) => (0..t.elements.len()).map(GroupElement::Index).collect(),
    };
    for g in &gens {
        let lhs = phi_q.apply(&q.apply(g)?)?;
        let rhs = q.apply(&s.phi.apply(g)?)?;
        if lhs != rhs {
            return Err(RingError::InvalidQuotient(format!(
                "phi does not descend at generator {g}"
            )));
        }
    }
    if let Some(ks) = kernel_gens {
        for k in ks {
            if q.apply(k)? != q.dst.identity() {
                return Err(RingError::InvalidQuotient(format!(
                    "declared kernel generator {k} does not map to identity"
                )));
            }
            if q.apply(&s.phi.apply(k)?)? != q.dst.identity() {
                return Err(RingError::InvalidQuotient(format!(
                    "phi(K) not contained in K at generator {k}"
                )));
            }
        }
    }
    let mut pushed = GroupRingElement::zero(&q.dst);
    for (g, c) in &s.terms {
        pushed.add_term(q.apply(g)?, *c)?;
    }
    shadow_project(&pushed, phi_q)
}

/// Serialization schema for shadows.
#[derive(Debug, Serialize, Deserialize)]
pub struct ShadowJson {
    pub schema: String,
    pub phi: Vec<serde_json::Value>,
    pub reduced: bool,
    pub terms: Vec<ShadowTermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ShadowTermJson {
    pub rep: serde_json::Value,
    pub coeff: i64,
}

pub fn element_to_json(model: &GroupModel, g: &GroupElement) -> serde_json::Value {
    match g {
        GroupElement::Word(w) => {
            let mut raw: Vec<i64> = Vec::new();
            for &(gen, e) in w {
                let s = if e > 0 { gen as i64 } else { -(gen as i64) };
                for _ in 0..e.unsigned_abs() {
                    raw.push(s);
                }
            }
            serde_json::json!(raw)
        }
        GroupElement::Vector(v) => serde_json::json!(v),
        GroupElement::Index(i) => {
            if let GroupModel::Finite(t) = model {
                serde_json::json!({ "index": i, "name": t.elements[*i] })
            } else {
                serde_json::json!({ "index": i })
            }
        }
    }
}

pub fn shadow_to_json(s: &ShadowElement) -> ShadowJson {
    let phi = match &s.phi.data {
        crate::group::EndoData::OnGenerators(images) => images
            .iter()
            .map(|g| element_to_json(&s.model, g))
            .collect(),
        crate::group::EndoData::FullMap(m) => m.iter().map(|&i| serde_json::json!(i)).collect(),
    };
    ShadowJson {
        schema: "1".into(),
        phi,
        reduced: s.reduced,
        terms: s
            .terms
            .iter()
            .map(|(g, c)| ShadowTermJson {
                rep: element_to_json(&s.model, g),
                coeff: *c,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{invert, normal_form, sample};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zmodel() -> Arc<GroupModel> {
        GroupModel::free_abelian(1)
    }

    fn endo_cube(m: &Arc<GroupModel>) -> GroupEndomorphism {
        GroupEndomorphism::on_generators(m, vec![GroupElement::Vector(vec![3])]).unwrap()
    }

    #[test]
    fn add_identity_and_polynomials() {
        let m = zmodel();
        let x = GroupRingElement::from_terms(
            &m,
            vec![
                (GroupElement::Vector(vec![0]), 1),
                (GroupElement::Vector(vec![1]), 1),
            ],
        )
        .unwrap();
        let zero = GroupRingElement::zero(&m);
        assert_eq!(ring_add(&x, &zero).unwrap(), x);
        // (1+t)(1-t) = 1 - t^2
        let y = GroupRingElement::from_terms(
            &m,
            vec![
                (GroupElement::Vector(vec![0]), 1),
                (GroupElement::Vector(vec![1]), -1),
            ],
        )
        .unwrap();
        let p = ring_mul(&x, &y).unwrap();
        let expect = GroupRingElement::from_terms(
            &m,
            vec![
                (GroupElement::Vector(vec![0]), 1),
                (GroupElement::Vector(vec![2]), -1),
            ],
        )
        .unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn square_matches_double_loop_oracle() {
        let m = GroupModel::symmetric_3();
        let g = GroupElement::Index(1);
        let h = GroupElement::Index(3);
        let x = GroupRingElement::from_terms(&m, vec![(g.clone(), 1), (h.clone(), 1)]).unwrap();
        let p = ring_mul(&x, &x).unwrap();
        // oracle: expand (g+h)^2 term by term
        let mut oracle = GroupRingElement::zero(&m);
        for a in [&g, &h] {
            for b in [&g, &h] {
                oracle.add_term(multiply(a, b, &m).unwrap(), 1).unwrap();
            }
        }
        assert_eq!(p, oracle);
    }

    #[test]
    fn augment_is_ring_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = GroupModel::free_abelian(2);
        assert_eq!(augment(&GroupRingElement::zero(&m)), 0);
        let g = sample::element(&mut rng, &m, 3);
        let h = sample::element(&mut rng, &m, 3);
        let x = GroupRingElement::from_terms(&m, vec![(g, 2), (h, -3)]).unwrap();
        assert!(augment(&x) == -1 || augment(&x) == 2 - 3 + 0); // -1 unless g == h
        for _ in 0..200 {
            let x = GroupRingElement::from_terms(
                &m,
                (0..3).map(|_| (sample::element(&mut rng, &m, 3), rng.random_range(-4..5))),
            )
            .unwrap();
            let y = GroupRingElement::from_terms(
                &m,
                (0..3).map(|_| (sample::element(&mut rng, &m, 3), rng.random_range(-4..5))),
            )
            .unwrap();
            assert_eq!(
                augment(&ring_mul(&x, &y).unwrap()),
                augment(&x) * augment(&y)
            );
        }
    }

    #[test]
    fn semiconjugacy_identity_on_abelian() {
        let m = GroupModel::free_abelian(2);
        let id = GroupEndomorphism::identity(&m);
        let v = GroupElement::Vector(vec![5, -3]);
        assert_eq!(semiconjugacy_class(&v, &id).unwrap(), v);
    }

    #[test]
    fn semiconjugacy_cube_map_mod_2() {
        // phi(t) = t^3 on Z: classes = Z/(1-3)Z = Z/2
        let m = zmodel();
        let phi = endo_cube(&m);
        let c0 = semiconjugacy_class(&GroupElement::Vector(vec![0]), &phi).unwrap();
        let c2 = semiconjugacy_class(&GroupElement::Vector(vec![2]), &phi).unwrap();
        let c1 = semiconjugacy_class(&GroupElement::Vector(vec![1]), &phi).unwrap();
        assert_eq!(c0, c2);
        assert_ne!(c0, c1);
    }

    #[test]
    fn transpositions_conjugate_in_s3() {
        let m = GroupModel::symmetric_3();
        let id = GroupEndomorphism::identity(&m);
        let c12 = semiconjugacy_class(&GroupElement::Index(1), &id).unwrap();
        let c13 = semiconjugacy_class(&GroupElement::Index(3), &id).unwrap();
        assert_eq!(c12, c13);
        let c_cycle = semiconjugacy_class(&GroupElement::Index(4), &id).unwrap();
        assert_ne!(c12, c_cycle);
    }

    #[test]
    fn free_conjugacy_cyclic_words() {
        let m = GroupModel::free(2);
        let id = GroupEndomorphism::identity(&m);
        // b a b^-1 ~ a
        let g = normal_form(&[2, 1, -2], &m).unwrap();
        let a = normal_form(&[1], &m).unwrap();
        assert_eq!(
            semiconjugacy_class(&g, &id).unwrap(),
            semiconjugacy_class(&a, &id).unwrap()
        );
        // ab ~ ba
        let ab = normal_form(&[1, 2], &m).unwrap();
        let ba = normal_form(&[2, 1], &m).unwrap();
        assert_eq!(
            semiconjugacy_class(&ab, &id).unwrap(),
            semiconjugacy_class(&ba, &id).unwrap()
        );
        assert_ne!(
            semiconjugacy_class(&ab, &id).unwrap(),
            semiconjugacy_class(&a, &id).unwrap()
        );
    }

    #[test]
    fn semiconjugacy_idempotent_and_orbit_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = GroupModel::free_abelian(2);
        let phi = GroupEndomorphism::on_generators(
            &m,
            vec![
                GroupElement::Vector(vec![2, 1]),
                GroupElement::Vector(vec![1, 1]),
            ],
        )
        .unwrap();
        let red = SemiconjReducer::new(&m, &phi);
        for _ in 0..2000 {
            let a = sample::element(&mut rng, &m, 6);
            let c = red.class(&a).unwrap();
            assert_eq!(red.class(&c).unwrap(), c);
            // orbit member: beta a phi(beta)^-1
            let beta = sample::element(&mut rng, &m, 6);
            let orb = multiply(
                &multiply(&beta, &a, &m).unwrap(),
                &invert(&phi.apply(&beta).unwrap(), &m).unwrap(),
                &m,
            )
            .unwrap();
            assert_eq!(red.class(&orb).unwrap(), c);
        }
    }

    #[test]
    fn shadow_trace_axiom_xy_yx() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for model in [
            GroupModel::free_abelian(2),
            GroupModel::symmetric_3(),
            GroupModel::free(2),
        ] {
            let id = GroupEndomorphism::identity(&model);
            for _ in 0..10_000 {
                let x = GroupRingElement::from_terms(
                    &model,
                    (0..2).map(|_| (sample::element(&mut rng, &model, 4), rng.random_range(-3..4))),
                )
                .unwrap();
                let y = GroupRingElement::from_terms(
                    &model,
                    (0..2).map(|_| (sample::element(&mut rng, &model, 4), rng.random_range(-3..4))),
                )
                .unwrap();
                let xy = shadow_project(&ring_mul(&x, &y).unwrap(), &id).unwrap();
                let yx = shadow_project(&ring_mul(&y, &x).unwrap(), &id).unwrap();
                assert_eq!(xy, yx);
            }
        }
    }

    #[test]
    fn twisted_cyclicity() {
        // shadow(x . y^phi) = shadow(y . x) -- the rank-1 cyclicity
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let m = GroupModel::free_abelian(2);
        let phi = GroupEndomorphism::on_generators(
            &m,
            vec![
                GroupElement::Vector(vec![2, 1]),
                GroupElement::Vector(vec![1, 1]),
            ],
        )
        .unwrap();
        for _ in 0..5000 {
            let x = GroupRingElement::from_terms(
                &m,
                (0..2).map(|_| (sample::element(&mut rng, &m, 4), rng.random_range(-3..4))),
            )
            .unwrap();
            let y = GroupRingElement::from_terms(
                &m,
                (0..2).map(|_| (sample::element(&mut rng, &m, 4), rng.random_range(-3..4))),
            )
            .unwrap();
            let lhs = shadow_project(
                &ring_mul(&x, &y.twist(&phi).unwrap()).unwrap(),
                &phi,
            )
            .unwrap();
            let rhs = shadow_project(&ring_mul(&y, &x).unwrap(), &phi).unwrap();
            assert_eq!(lhs, rhs);
        }
        // same over a finite model with an inner twist
        let s3 = GroupModel::symmetric_3();
        let t = match &*s3 {
            GroupModel::Finite(t) => t.clone(),
            _ => unreachable!(),
        };
        let c = 4usize;
        let map: Vec<usize> = (0..6).map(|x| t.table[t.table[c][x]][t.inverse[c]]).collect();
        let phi3 = GroupEndomorphism::full_map(&s3, map).unwrap();
        for _ in 0..5000 {
            let x = GroupRingElement::from_terms(
                &s3,
                (0..2).map(|_| (sample::element(&mut rng, &s3, 1), rng.random_range(-3..4))),
            )
            .unwrap();
            let y = GroupRingElement::from_terms(
                &s3,
                (0..2).map(|_| (sample::element(&mut rng, &s3, 1), rng.random_range(-3..4))),
            )
            .unwrap();
            let lhs =
                shadow_project(&ring_mul(&x, &y.twist(&phi3).unwrap()).unwrap(), &phi3).unwrap();
            let rhs = shadow_project(&ring_mul(&y, &x).unwrap(), &phi3).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn projection_preserves_augmentation() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let m = zmodel();
        let phi = endo_cube(&m);
        for _ in 0..1000 {
            let x = GroupRingElement::from_terms(
                &m,
                (0..3).map(|_| (sample::element(&mut rng, &m, 5), rng.random_range(-4..5))),
            )
            .unwrap();
            let s = shadow_project(&x, &phi).unwrap();
            assert_eq!(s.augment(), augment(&x));
        }
    }

    #[test]
    fn cube_map_shadow_merges() {
        // t^0 + t^2 -> 2 [t^0] under phi(t)=t^3
        let m = zmodel();
        let phi = endo_cube(&m);
        let x = GroupRingElement::from_terms(
            &m,
            vec![
                (GroupElement::Vector(vec![0]), 1),
                (GroupElement::Vector(vec![2]), 1),
            ],
        )
        .unwrap();
        let s = shadow_project(&x, &phi).unwrap();
        assert!(s.reduced);
        assert_eq!(s.terms.len(), 1);
        assert_eq!(*s.terms.values().next().unwrap(), 2);
    }

    #[test]
    fn formal_fallback_for_twisted_free() {
        let m = GroupModel::free(2);
        let phi = GroupEndomorphism::on_generators(
            &m,
            vec![
                normal_form(&[1, 2], &m).unwrap(),
                normal_form(&[2], &m).unwrap(),
            ],
        )
        .unwrap();
        let x = GroupRingElement::one(&m);
        let s = shadow_project(&x, &phi).unwrap();
        assert!(!s.reduced);
        assert!(s.nonzero_classes().is_err());
    }

    #[test]
    fn mod_k_collapse_to_point() {
        // quotient by everything: any shadow -> (sum coeffs) . [e]
        let m = GroupModel::free(2);
        let id = GroupEndomorphism::identity(&m);
        let triv = GroupModel::trivial();
        let q = GroupMap::new(
            &m,
            &triv,
            crate::group::EndoData::OnGenerators(vec![triv.identity(), triv.identity()]),
        )
        .unwrap();
        let phi_q = GroupEndomorphism::identity(&triv);
        let x = GroupRingElement::from_terms(
            &m,
            vec![
                (normal_form(&[1], &m).unwrap(), 2),
                (normal_form(&[2, 1], &m).unwrap(), -5),
            ],
        )
        .unwrap();
        let s = shadow_project(&x, &id).unwrap();
        let t = mod_k_project(&s, &q, &phi_q, None).unwrap();
        assert_eq!(t.augment(), -3);
        assert_eq!(t.terms.len(), 1);
    }

    #[test]
    fn abelianization_kills_commutator() {
        let m = GroupModel::free(2);
        let id = GroupEndomorphism::identity(&m);
        let ab = GroupModel::free_abelian(2);
        let q = GroupMap::new(
            &m,
            &ab,
            crate::group::EndoData::OnGenerators(vec![
                GroupElement::Vector(vec![1, 0]),
                GroupElement::Vector(vec![0, 1]),
            ]),
        )
        .unwrap();
        let phi_q = GroupEndomorphism::identity(&ab);
        let comm = normal_form(&[1, 2, -1, -2], &m).unwrap();
        let s = shadow_project(&GroupRingElement::basis(&m, comm), &id).unwrap();
        let t = mod_k_project(&s, &q, &phi_q, None).unwrap();
        assert_eq!(t.terms.len(), 1);
        assert!(t.terms.contains_key(&ab.identity()));
    }

    #[test]
    fn augment_invariant_under_mod_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let m = GroupModel::free(2);
        let id = GroupEndomorphism::identity(&m);
        let ab = GroupModel::free_abelian(2);
        let q = GroupMap::new(
            &m,
            &ab,
            crate::group::EndoData::OnGenerators(vec![
                GroupElement::Vector(vec![1, 0]),
                GroupElement::Vector(vec![0, 1]),
            ]),
        )
        .unwrap();
        let phi_q = GroupEndomorphism::identity(&ab);
        for _ in 0..500 {
            let x = GroupRingElement::from_terms(
                &m,
                (0..3).map(|_| (sample::element(&mut rng, &m, 4), rng.random_range(-4..5))),
            )
            .unwrap();
            let s = shadow_project(&x, &id).unwrap();
            let t = mod_k_project(&s, &q, &phi_q, None).unwrap();
            assert_eq!(t.augment(), s.augment());
        }
    }
}
