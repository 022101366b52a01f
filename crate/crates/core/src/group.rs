//! Finitely generated groups with decidable word problems: free groups,
//! free-abelian groups and finite groups given by multiplication tables.
//! Elements are kept in canonical form so equality is structural.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on finite multiplication tables; orbit enumeration stays cheap below it.
pub const MAX_TABLE: usize = 512;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("generator index {0} out of range (rank {1})")]
    GeneratorOutOfRange(i64, usize),
    #[error("element index {0} out of range (order {1})")]
    ElementOutOfRange(usize, usize),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("finite table rejected: {0}")]
    BadTable(String),
    #[error("table has {0} elements, cap is {MAX_TABLE}")]
    TableTooLarge(usize),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("relation {index} maps to non-identity element {image}")]
    RelationViolated { index: usize, image: String },
}

pub type GResult<T> = Result<T, GroupError>;

/// A group presented in one of the three supported shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupModel {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    Finite(FiniteTable),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTable {
    pub elements: Vec<String>,
    /// table[a][b] = index of a*b
    pub table: Vec<Vec<usize>>,
    pub inverse: Vec<usize>,
    pub identity: usize,
}

impl GroupModel {
    pub fn free(rank: usize) -> Arc<Self> {
        Arc::new(GroupModel::Free { rank })
    }

    pub fn free_abelian(rank: usize) -> Arc<Self> {
        Arc::new(GroupModel::FreeAbelian { rank })
    }

    /// The trivial group, as a finite table.
    pub fn trivial() -> Arc<Self> {
        Self::finite(vec!["e".into()], vec![vec![0]]).unwrap()
    }

    /// Build and validate a finite model from element names and a multiplication table.
    pub fn finite(elements: Vec<String>, table: Vec<Vec<usize>>) -> GResult<Arc<Self>> {
        let n = elements.len();
        if n == 0 {
            return Err(GroupError::BadTable("empty element list".into()));
        }
        if n > MAX_TABLE {
            return Err(GroupError::TableTooLarge(n));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(GroupError::BadTable("table is not n x n".into()));
        }
        for row in &table {
            for &v in row {
                if v >= n {
                    return Err(GroupError::BadTable(format!("entry {v} out of range")));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| GroupError::BadTable("no identity element".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == identity && table[b][a] == identity) {
                Some(b) => inverse[a] = b,
                None => {
                    return Err(GroupError::BadTable(format!(
                        "element {} has no inverse",
                        elements[a]
                    )))
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::BadTable(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(Arc::new(GroupModel::Finite(FiniteTable {
            elements,
            table,
            inverse,
            identity,
        })))
    }

    /// Symmetric group on three letters, elements as permutation words.
    pub fn symmetric_3() -> Arc<Self> {
        // permutations of {0,1,2} in one-line notation
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let names = vec!["e", "(01)", "(12)", "(02)", "(012)", "(021)"];
        let idx = |p: &[usize; 3]| perms.iter().position(|q| q == p).unwrap();
        let mut table = vec![vec![0usize; 6]; 6];
        for (a, pa) in perms.iter().enumerate() {
            for (b, pb) in perms.iter().enumerate() {
                // (a*b)(x) = a(b(x))
                let prod = [pa[pb[0]], pa[pb[1]], pa[pb[2]]];
                table[a][b] = idx(&prod);
            }
        }
        Self::finite(names.into_iter().map(String::from).collect(), table).unwrap()
    }

    pub fn cyclic(n: usize) -> GResult<Arc<Self>> {
        let elements = (0..n).map(|i| format!("g{i}")).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::finite(elements, table)
    }

    /// Direct product of two finite models.
    pub fn finite_product(a: &FiniteTable, b: &FiniteTable) -> GResult<Arc<Self>> {
        let (na, nb) = (a.elements.len(), b.elements.len());
        let mut elements = Vec::with_capacity(na * nb);
        for i in 0..na {
            for j in 0..nb {
                elements.push(format!("({},{})", a.elements[i], b.elements[j]));
            }
        }
        let mut table = vec![vec![0usize; na * nb]; na * nb];
        for i1 in 0..na {
            for j1 in 0..nb {
                for i2 in 0..na {
                    for j2 in 0..nb {
                        table[i1 * nb + j1][i2 * nb + j2] =
                            a.table[i1][i2] * nb + b.table[j1][j2];
                    }
                }
            }
        }
        Self::finite(elements, table)
    }

    pub fn rank(&self) -> usize {
        match self {
            GroupModel::Free { rank } | GroupModel::FreeAbelian { rank } => *rank,
            GroupModel::Finite(_) => 0,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupModel::Free { .. } => GroupElement::Word(Vec::new()),
            GroupModel::FreeAbelian { rank } => GroupElement::Vector(vec![0; *rank]),
            GroupModel::Finite(t) => GroupElement::Index(t.identity),
        }
    }

    /// Single generator as an element (1-based index).
    pub fn generator(&self, i: usize) -> GResult<GroupElement> {
        match self {
            GroupModel::Free { rank } => {
                if i == 0 || i > *rank {
                    return Err(GroupError::GeneratorOutOfRange(i as i64, *rank));
                }
                Ok(GroupElement::Word(vec![(i as u32, 1)]))
            }
            GroupModel::FreeAbelian { rank } => {
                if i == 0 || i > *rank {
                    return Err(GroupError::GeneratorOutOfRange(i as i64, *rank));
                }
                let mut v = vec![0; *rank];
                v[i - 1] = 1;
                Ok(GroupElement::Vector(v))
            }
            GroupModel::Finite(t) => {
                // finite models have no distinguished generators; treat index as element
                if i >= t.elements.len() {
                    return Err(GroupError::ElementOutOfRange(i, t.elements.len()));
                }
                Ok(GroupElement::Index(i))
            }
        }
    }

    pub fn display(&self, g: &GroupElement) -> String {
        match (self, g) {
            (_, GroupElement::Word(w)) if w.is_empty() => "e".into(),
            (_, GroupElement::Word(w)) => w
                .iter()
                .map(|&(g, e)| {
                    if e == 1 {
                        format!("x{g}")
                    } else {
                        format!("x{g}^{e}")
                    }
                })
                .collect::<Vec<_>>()
                .join("."),
            (_, GroupElement::Vector(v)) => format!(
                "({})",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            (GroupModel::Finite(t), GroupElement::Index(i)) => t.elements[*i].clone(),
            (_, GroupElement::Index(i)) => format!("#{i}"),
        }
    }
}

/// Canonical element: freely reduced RLE word, exponent vector, or table index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupElement {
    /// run-length encoded word: (generator 1-based, nonzero exponent), adjacent generators differ
    Word(Vec<(u32, i64)>),
    Vector(Vec<i64>),
    Index(usize),
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Word(w) => w.is_empty(),
            GroupElement::Vector(v) => v.iter().all(|&x| x == 0),
            GroupElement::Index(_) => false, // cannot tell without the model
        }
    }

    fn belongs(&self, model: &GroupModel) -> bool {
        matches!(
            (self, model),
            (GroupElement::Word(_), GroupModel::Free { .. })
                | (GroupElement::Vector(_), GroupModel::FreeAbelian { .. })
                | (GroupElement::Index(_), GroupModel::Finite(_))
        )
    }
}

fn push_reduced(word: &mut Vec<(u32, i64)>, gen: u32, exp: i64) {
    if exp == 0 {
        return;
    }
    if let Some(last) = word.last_mut() {
        if last.0 == gen {
            last.1 += exp;
            if last.1 == 0 {
                word.pop();
            }
            return;
        }
    }
    word.push((gen, exp));
}

/// Canonicalize a raw signed-index word in the given model.
pub fn normal_form(raw: &[i64], model: &GroupModel) -> GResult<GroupElement> {
    match model {
        GroupModel::Free { rank } => {
            let mut word: Vec<(u32, i64)> = Vec::new();
            for &s in raw {
                let g = s.unsigned_abs() as usize;
                if s == 0 || g > *rank {
                    return Err(GroupError::GeneratorOutOfRange(s, *rank));
                }
                push_reduced(&mut word, g as u32, s.signum());
            }
            Ok(GroupElement::Word(word))
        }
        GroupModel::FreeAbelian { rank } => {
            let mut v = vec![0i64; *rank];
            for &s in raw {
                let g = s.unsigned_abs() as usize;
                if s == 0 || g > *rank {
                    return Err(GroupError::GeneratorOutOfRange(s, *rank));
                }
                v[g - 1] += s.signum();
            }
            Ok(GroupElement::Vector(v))
        }
        GroupModel::Finite(t) => {
            // fold the table left to right; signed index i means element |i|-1, negative = inverse
            let mut acc = t.identity;
            for &s in raw {
                let i = (s.unsigned_abs() as usize)
                    .checked_sub(1)
                    .ok_or(GroupError::GeneratorOutOfRange(s, t.elements.len()))?;
                if i >= t.elements.len() {
                    return Err(GroupError::ElementOutOfRange(i, t.elements.len()));
                }
                let x = if s < 0 { t.inverse[i] } else { i };
                acc = t.table[acc][x];
            }
            Ok(GroupElement::Index(acc))
        }
    }
}

/// Product a*b. When elements are read as paths the right factor composes first,
/// so this is the (beta, alpha) -> beta.alpha convention.
pub fn multiply(a: &GroupElement, b: &GroupElement, model: &GroupModel) -> GResult<GroupElement> {
    if !a.belongs(model) || !b.belongs(model) {
        return Err(GroupError::ModelMismatch(
            "element shape does not match model".into(),
        ));
    }
    match (a, b) {
        (GroupElement::Word(wa), GroupElement::Word(wb)) => {
            let mut out = wa.clone();
            for &(g, e) in wb {
                push_reduced(&mut out, g, e);
            }
            Ok(GroupElement::Word(out))
        }
        (GroupElement::Vector(va), GroupElement::Vector(vb)) => Ok(GroupElement::Vector(
            va.iter().zip(vb).map(|(x, y)| x + y).collect(),
        )),
        (GroupElement::Index(ia), GroupElement::Index(ib)) => {
            let t = match model {
                GroupModel::Finite(t) => t,
                _ => unreachable!(),
            };
            Ok(GroupElement::Index(t.table[*ia][*ib]))
        }
        _ => Err(GroupError::ModelMismatch("mixed element kinds".into())),
    }
}

pub fn invert(a: &GroupElement, model: &GroupModel) -> GResult<GroupElement> {
    if !a.belongs(model) {
        return Err(GroupError::ModelMismatch(
            "element shape does not match model".into(),
        ));
    }
    Ok(match a {
        GroupElement::Word(w) => {
            GroupElement::Word(w.iter().rev().map(|&(g, e)| (g, -e)).collect())
        }
        GroupElement::Vector(v) => GroupElement::Vector(v.iter().map(|x| -x).collect()),
        GroupElement::Index(i) => {
            let t = match model {
                GroupModel::Finite(t) => t,
                _ => unreachable!(),
            };
            GroupElement::Index(t.inverse[*i])
        }
    })
}

/// Raise to an integer power by repeated squaring on the canonical form.
pub fn power(a: &GroupElement, n: i64, model: &GroupModel) -> GResult<GroupElement> {
    let mut base = if n < 0 { invert(a, model)? } else { a.clone() };
    let mut k = n.unsigned_abs();
    let mut acc = model.identity();
    while k > 0 {
        if k & 1 == 1 {
            acc = multiply(&acc, &base, model)?;
        }
        base = multiply(&base, &base, model)?;
        k >>= 1;
    }
    Ok(acc)
}

/// An endomorphism of a single model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndoData {
    /// image of each generator, for free and free-abelian models
    OnGenerators(Vec<GroupElement>),
    /// image of each element, for finite models
    FullMap(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupEndomorphism {
    pub model: Arc<GroupModel>,
    pub data: EndoData,
}

impl GroupEndomorphism {
    pub fn identity(model: &Arc<GroupModel>) -> Self {
        let data = match &**model {
            GroupModel::Free { rank } | GroupModel::FreeAbelian { rank } => EndoData::OnGenerators(
                (1..=*rank).map(|i| model.generator(i).unwrap()).collect(),
            ),
            GroupModel::Finite(t) => EndoData::FullMap((0..t.elements.len()).collect()),
        };
        GroupEndomorphism {
            model: model.clone(),
            data,
        }
    }

    pub fn is_identity(&self) -> bool {
        self == &Self::identity(&self.model)
    }

    /// Build from generator images (free kinds) and validate the shape.
    pub fn on_generators(model: &Arc<GroupModel>, images: Vec<GroupElement>) -> GResult<Self> {
        match &**model {
            GroupModel::Free { rank } | GroupModel::FreeAbelian { rank } => {
                if images.len() != *rank {
                    return Err(GroupError::NotHomomorphism(format!(
                        "expected {rank} generator images, got {}",
                        images.len()
                    )));
                }
                for g in &images {
                    if !g.belongs(model) {
                        return Err(GroupError::ModelMismatch(
                            "generator image not in model".into(),
                        ));
                    }
                }
                Ok(GroupEndomorphism {
                    model: model.clone(),
                    data: EndoData::OnGenerators(images),
                })
            }
            GroupModel::Finite(_) => Err(GroupError::NotHomomorphism(
                "finite models need a full element map".into(),
            )),
        }
    }

    /// Build from a full element map (finite models) and check it is a homomorphism.
    pub fn full_map(model: &Arc<GroupModel>, map: Vec<usize>) -> GResult<Self> {
        let t = match &**model {
            GroupModel::Finite(t) => t,
            _ => {
                return Err(GroupError::NotHomomorphism(
                    "full maps only apply to finite models".into(),
                ))
            }
        };
        let n = t.elements.len();
        if map.len() != n || map.iter().any(|&x| x >= n) {
            return Err(GroupError::NotHomomorphism("map is not into the group".into()));
        }
        for a in 0..n {
            for b in 0..n {
                if map[t.table[a][b]] != t.table[map[a]][map[b]] {
                    return Err(GroupError::NotHomomorphism(format!(
                        "phi({}*{}) != phi({})*phi({})",
                        t.elements[a], t.elements[b], t.elements[a], t.elements[b]
                    )));
                }
            }
        }
        Ok(GroupEndomorphism {
            model: model.clone(),
            data: EndoData::FullMap(map),
        })
    }

    /// For a free-abelian model, the matrix A with phi(e_j) = sum_i A[i][j] e_i.
    pub fn abelian_matrix(&self) -> Option<Vec<Vec<i64>>> {
        let rank = match &*self.model {
            GroupModel::FreeAbelian { rank } => *rank,
            _ => return None,
        };
        let images = match &self.data {
            EndoData::OnGenerators(im) => im,
            _ => return None,
        };
        let mut a = vec![vec![0i64; rank]; rank];
        for (j, img) in images.iter().enumerate() {
            if let GroupElement::Vector(v) = img {
                for i in 0..rank {
                    a[i][j] = v[i];
                }
            }
        }
        Some(a)
    }

    pub fn apply(&self, g: &GroupElement) -> GResult<GroupElement> {
        apply_images(&self.model, &self.model, &self.data, g)
    }

    /// Composite x -> self(other(x)).
    pub fn compose(&self, other: &GroupEndomorphism) -> GResult<GroupEndomorphism> {
        if self.model != other.model {
            return Err(GroupError::ModelMismatch("composing over different models".into()));
        }
        let data = match &other.data {
            EndoData::OnGenerators(images) => EndoData::OnGenerators(
                images
                    .iter()
                    .map(|g| self.apply(g))
                    .collect::<GResult<Vec<_>>>()?,
            ),
            EndoData::FullMap(map) => {
                let outer = match &self.data {
                    EndoData::FullMap(m) => m,
                    _ => unreachable!(),
                };
                EndoData::FullMap(map.iter().map(|&i| outer[i]).collect())
            }
        };
        Ok(GroupEndomorphism {
            model: self.model.clone(),
            data,
        })
    }
}

/// A homomorphism between two (possibly different) models, e.g. an abelianization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMap {
    pub src: Arc<GroupModel>,
    pub dst: Arc<GroupModel>,
    pub data: EndoData,
}

impl GroupMap {
    pub fn new(src: &Arc<GroupModel>, dst: &Arc<GroupModel>, data: EndoData) -> GResult<Self> {
        match (&data, &**src) {
            (EndoData::OnGenerators(images), GroupModel::Free { rank })
            | (EndoData::OnGenerators(images), GroupModel::FreeAbelian { rank }) => {
                if images.len() != *rank {
                    return Err(GroupError::NotHomomorphism(format!(
                        "expected {rank} images, got {}",
                        images.len()
                    )));
                }
                if images.iter().any(|g| !g.belongs(dst)) {
                    return Err(GroupError::ModelMismatch("image not in target model".into()));
                }
                // a map out of a free-abelian group needs commuting images
                if matches!(&**src, GroupModel::FreeAbelian { .. }) {
                    for i in 0..images.len() {
                        for j in i + 1..images.len() {
                            let ab = multiply(&images[i], &images[j], dst)?;
                            let ba = multiply(&images[j], &images[i], dst)?;
                            if ab != ba {
                                return Err(GroupError::NotHomomorphism(format!(
                                    "images of generators {} and {} do not commute",
                                    i + 1,
                                    j + 1
                                )));
                            }
                        }
                    }
                }
            }
            (EndoData::FullMap(map), GroupModel::Finite(t)) => {
                let n = t.elements.len();
                if map.len() != n {
                    return Err(GroupError::NotHomomorphism("map length mismatch".into()));
                }
                for a in 0..n {
                    for b in 0..n {
                        let lhs = map[t.table[a][b]];
                        let ga = GroupElement::Index(map[a]);
                        let gb = GroupElement::Index(map[b]);
                        let rhs = multiply(&ga, &gb, dst)?;
                        if GroupElement::Index(lhs) != rhs {
                            return Err(GroupError::NotHomomorphism(format!(
                                "fails at ({a},{b})"
                            )));
                        }
                    }
                }
            }
            _ => {
                return Err(GroupError::NotHomomorphism(
                    "map data shape does not match source model".into(),
                ))
            }
        }
        Ok(GroupMap {
            src: src.clone(),
            dst: dst.clone(),
            data,
        })
    }

    pub fn apply(&self, g: &GroupElement) -> GResult<GroupElement> {
        apply_images(&self.src, &self.dst, &self.data, g)
    }
}

fn apply_images(
    src: &GroupModel,
    dst: &GroupModel,
    data: &EndoData,
    g: &GroupElement,
) -> GResult<GroupElement> {
    if !g.belongs(src) {
        return Err(GroupError::ModelMismatch("element not in source model".into()));
    }
    match (data, g) {
        (EndoData::OnGenerators(images), GroupElement::Word(w)) => {
            let mut acc = dst.identity();
            for &(gen, exp) in w {
                let img = images
                    .get(gen as usize - 1)
                    .ok_or(GroupError::GeneratorOutOfRange(gen as i64, images.len()))?;
                acc = multiply(&acc, &power(img, exp, dst)?, dst)?;
            }
            Ok(acc)
        }
        (EndoData::OnGenerators(images), GroupElement::Vector(v)) => {
            let mut acc = dst.identity();
            for (j, &e) in v.iter().enumerate() {
                if e != 0 {
                    acc = multiply(&acc, &power(&images[j], e, dst)?, dst)?;
                }
            }
            Ok(acc)
        }
        (EndoData::FullMap(map), GroupElement::Index(i)) => {
            let j = *map
                .get(*i)
                .ok_or(GroupError::ElementOutOfRange(*i, map.len()))?;
            Ok(GroupElement::Index(j))
        }
        _ => Err(GroupError::ModelMismatch("endomorphism data mismatch".into())),
    }
}

/// Check that every relation (a raw word over the source generators) maps to the
/// identity under the given generator images. Reports the first violation.
pub fn validate_relations(
    dst: &Arc<GroupModel>,
    images: &[GroupElement],
    relations: &[Vec<i64>],
) -> GResult<()> {
    for (index, rel) in relations.iter().enumerate() {
        let mut acc = dst.identity();
        for &s in rel {
            let g = s.unsigned_abs() as usize;
            if s == 0 || g > images.len() {
                return Err(GroupError::GeneratorOutOfRange(s, images.len()));
            }
            let img = if s < 0 {
                invert(&images[g - 1], dst)?
            } else {
                images[g - 1].clone()
            };
            acc = multiply(&acc, &img, dst)?;
        }
        if acc != dst.identity() {
            return Err(GroupError::RelationViolated {
                index,
                image: dst.display(&acc),
            });
        }
    }
    Ok(())
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Word(w) if w.is_empty() => write!(f, "e"),
            GroupElement::Word(w) => {
                for (i, &(g, e)) in w.iter().enumerate() {
                    if i > 0 {
                        write!(f, ".")?;
                    }
                    if e == 1 {
                        write!(f, "x{g}")?;
                    } else {
                        write!(f, "x{g}^{e}")?;
                    }
                }
                Ok(())
            }
            GroupElement::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            GroupElement::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// Deterministic random elements for the property harnesses.
pub mod sample {
    use super::*;
    use rand::Rng;

    pub fn element<R: Rng>(rng: &mut R, model: &GroupModel, len: usize) -> GroupElement {
        match model {
            GroupModel::Free { rank } => {
                if *rank == 0 {
                    return GroupElement::Word(Vec::new());
                }
                let l = rng.random_range(0..=len);
                let raw: Vec<i64> = (0..l)
                    .map(|_| {
                        let g = rng.random_range(1..=*rank) as i64;
                        if rng.random_bool(0.5) {
                            g
                        } else {
                            -g
                        }
                    })
                    .collect();
                normal_form(&raw, model).unwrap()
            }
            GroupModel::FreeAbelian { rank } => GroupElement::Vector(
                (0..*rank)
                    .map(|_| rng.random_range(-(len as i64)..=len as i64))
                    .collect(),
            ),
            GroupModel::Finite(t) => {
                GroupElement::Index(rng.random_range(0..t.elements.len()))
            }
        }
    }
}
