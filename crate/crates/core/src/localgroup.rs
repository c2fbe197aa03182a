//! Finite local groups `H` with a boundary-permutation homomorphism
//! `q: H -> Sym(d)`.
//!
//! `H` is realized as a permutation group of some degree `N` generated by a
//! list of named permutations, each paired with its `q`-image. The closure is
//! enumerated breadth-first; `q` is extended multiplicatively and every Cayley
//! edge is checked, so a `LocalGroup` that builds successfully carries a
//! well-defined homomorphism.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::parse::{column_of, ParseError};
use crate::trees::{check_arity, DEFAULT_DEPTH_LIMIT};

pub const DEFAULT_MAX_ORDER: usize = 20160;

/// Groups up to this order get a full multiplication table.
const TABLE_ORDER: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invalid arity {0}")]
    InvalidArity(usize),
    #[error("generator {name}: expected degree {expected}, got {got}")]
    DegreeMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("not a permutation: {0:?}")]
    InvalidPerm(Vec<u32>),
    #[error("q is not well defined: {word} is sent to both {first} and {second}")]
    QConflict {
        word: String,
        first: String,
        second: String,
    },
    #[error("group order exceeds the bound {limit}")]
    SizeLimit { limit: usize },
    #[error("elements belong to different local groups")]
    GroupMismatch,
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
}

/// A permutation of `{0, .., n-1}`, stored by images.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            images: (0..n as u32).collect(),
        }
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self, GroupError> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            match seen.get_mut(i as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(GroupError::InvalidPerm(images)),
            }
        }
        Ok(Perm { images })
    }

    /// Builds a permutation of degree `n` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[Vec<u32>]) -> Result<Self, GroupError> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                let y = cycle[(k + 1) % cycle.len()];
                if x as usize >= n || y as usize >= n || touched[x as usize] {
                    return Err(GroupError::InvalidPerm(cycle.clone()));
                }
                touched[x as usize] = true;
                images[x as usize] = y;
            }
        }
        Perm::from_images(images)
    }

    /// Parses cycle notation such as `"(0 1)(2 3 4)"`; `"()"` is the identity.
    pub fn parse_cycles(n: usize, text: &str) -> Result<Self, String> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| format!("expected '(' in cycle notation {text:?}"))?;
            let close = open
                .find(')')
                .ok_or_else(|| format!("unclosed cycle in {text:?}"))?;
            let body = &open[..close];
            let cycle = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u32>().map_err(|_| format!("bad point {s:?} in {text:?}")))
                .collect::<Result<Vec<_>, _>>()?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = open[close + 1..].trim_start();
        }
        Perm::from_cycles(n, &cycles).map_err(|e| format!("{e} in {text:?}"))
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm {
            images: other.images.iter().map(|&i| self.images[i as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u32;
        }
        Perm { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.images.len()];
        let mut out = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            let mut cycle = vec![start as u32];
            seen[start] = true;
            let mut x = self.images[start] as usize;
            while x != start {
                seen[x] = true;
                cycle.push(x as u32);
                x = self.images[x] as usize;
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            f.write_str("(")?;
            for (k, x) in c.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub perm: Perm,
    pub q: Perm,
}

impl Generator {
    pub fn new(name: impl Into<String>, perm: Perm, q: Perm) -> Self {
        Generator {
            name: name.into(),
            perm,
            q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupOptions {
    pub max_order: usize,
    pub depth_limit: usize,
}

impl Default for GroupOptions {
    fn default() -> Self {
        GroupOptions {
            max_order: DEFAULT_MAX_ORDER,
            depth_limit: DEFAULT_DEPTH_LIMIT,
        }
    }
}

struct ImageData {
    group: Arc<LocalGroup>,
    /// index in the image group of `q(h)`, per element `h`
    image_of: Vec<u32>,
    /// first element (in enumeration order) over each image element
    section: Vec<u32>,
}

/// A finite local group with its homomorphism to `Sym(d)`.
pub struct LocalGroup {
    arity: u8,
    degree: usize,
    generators: Vec<Generator>,
    elements: Vec<Perm>,
    q_images: Vec<Perm>,
    index: HashMap<Perm, u32>,
    inverses: Vec<u32>,
    words: Vec<Vec<u16>>,
    table: Option<Vec<u32>>,
    q_faithful: bool,
    options: GroupOptions,
    name: Option<String>,
    image: OnceLock<ImageData>,
}

impl fmt::Debug for LocalGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalGroup")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("degree", &self.degree)
            .field("order", &self.elements.len())
            .field("generators", &self.generators)
            .finish()
    }
}

impl LocalGroup {
    pub fn build(d: usize, degree: usize, gens: Vec<Generator>) -> Result<Arc<Self>, GroupError> {
        Self::build_with(d, degree, gens, GroupOptions::default())
    }

    /// Breadth-first closure of the generators with `q` extended along every
    /// Cayley edge `x -> x * g`.
    pub fn build_with(
        d: usize,
        degree: usize,
        gens: Vec<Generator>,
        options: GroupOptions,
    ) -> Result<Arc<Self>, GroupError> {
        let arity = check_arity(d).map_err(|_| GroupError::InvalidArity(d))?;
        for (k, g) in gens.iter().enumerate() {
            if g.perm.degree() != degree {
                return Err(GroupError::DegreeMismatch {
                    name: g.name.clone(),
                    expected: degree,
                    got: g.perm.degree(),
                });
            }
            if g.q.degree() != d {
                return Err(GroupError::DegreeMismatch {
                    name: g.name.clone(),
                    expected: d,
                    got: g.q.degree(),
                });
            }
            if gens[..k].iter().any(|o| o.name == g.name) || g.name == "id" {
                return Err(GroupError::DuplicateGenerator(g.name.clone()));
            }
        }
        let mut elements = vec![Perm::identity(degree)];
        let mut q_images = vec![Perm::identity(d)];
        let mut words: Vec<Vec<u16>> = vec![vec![]];
        let mut index: HashMap<Perm, u32> = HashMap::new();
        index.insert(elements[0].clone(), 0);
        let mut cursor = 0;
        while cursor < elements.len() {
            for (gi, g) in gens.iter().enumerate() {
                let p = elements[cursor].compose(&g.perm);
                let qp = q_images[cursor].compose(&g.q);
                match index.get(&p) {
                    Some(&existing) => {
                        if q_images[existing as usize] != qp {
                            let mut w = words[cursor].clone();
                            w.push(gi as u16);
                            return Err(GroupError::QConflict {
                                word: word_text(&gens, &w),
                                first: q_images[existing as usize].to_string(),
                                second: qp.to_string(),
                            });
                        }
                    }
                    None => {
                        if elements.len() >= options.max_order {
                            return Err(GroupError::SizeLimit {
                                limit: options.max_order,
                            });
                        }
                        index.insert(p.clone(), elements.len() as u32);
                        let mut w = words[cursor].clone();
                        w.push(gi as u16);
                        words.push(w);
                        elements.push(p);
                        q_images.push(qp);
                    }
                }
            }
            cursor += 1;
        }
        let order = elements.len();
        let inverses = elements
            .iter()
            .map(|p| {
                *index
                    .get(&p.inverse())
                    .expect("finite closure under products contains inverses")
            })
            .collect();
        let table = (order <= TABLE_ORDER).then(|| {
            let mut t = Vec::with_capacity(order * order);
            for a in &elements {
                for b in &elements {
                    t.push(index[&a.compose(b)]);
                }
            }
            t
        });
        let q_faithful = {
            let mut seen = std::collections::HashSet::new();
            q_images.iter().all(|q| seen.insert(q.clone()))
        };
        let group = LocalGroup {
            arity,
            degree,
            generators: gens,
            elements,
            q_images,
            index,
            inverses,
            words,
            table,
            q_faithful,
            options,
            name: None,
            image: OnceLock::new(),
        };
        group.verify_homomorphism()?;
        Ok(Arc::new(group))
    }

    /// Pairwise check of `q(ab) = q(a) q(b)` over the whole closure, when a
    /// multiplication table exists. Larger groups rely on the Cayley-edge check
    /// done during the closure, which implies the same statement.
    fn verify_homomorphism(&self) -> Result<(), GroupError> {
        if !self.q_images[0].is_identity() {
            return Err(GroupError::QConflict {
                word: "id".into(),
                first: self.q_images[0].to_string(),
                second: Perm::identity(self.arity as usize).to_string(),
            });
        }
        if let Some(table) = &self.table {
            let n = self.elements.len();
            for a in 0..n {
                for b in 0..n {
                    let ab = table[a * n + b] as usize;
                    let expected = self.q_images[a].compose(&self.q_images[b]);
                    if self.q_images[ab] != expected {
                        return Err(GroupError::QConflict {
                            word: format!("{}*{}", self.word(a as u32), self.word(b as u32)),
                            first: self.q_images[ab].to_string(),
                            second: expected.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The trivial local group `{1}`, which gives the classical `V_d`.
    pub fn trivial(d: usize) -> Result<Arc<Self>, GroupError> {
        Self::build(d, 1, vec![])
    }

    /// Parses the group definition format:
    ///
    /// ```text
    /// d 2 N 2
    /// gen a = (0 1) ; q = (0 1)
    /// ```
    pub fn parse(text: &str) -> Result<(usize, usize, Vec<Generator>), ParseError> {
        let mut header: Option<(usize, usize)> = None;
        let mut gens = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let Some((d, n)) = header else {
                let toks: Vec<&str> = line.split_whitespace().collect();
                match toks.as_slice() {
                    ["d", d, "N", n] => {
                        let d = d.parse::<usize>().map_err(|_| {
                            ParseError::new(line_no, column_of(line, d, 1), format!("bad arity {d:?}"))
                        })?;
                        let n = n.parse::<usize>().map_err(|_| {
                            ParseError::new(line_no, column_of(line, n, 3), format!("bad degree {n:?}"))
                        })?;
                        header = Some((d, n));
                        continue;
                    }
                    _ => {
                        return Err(ParseError::new(
                            line_no,
                            1,
                            "expected header \"d <d> N <N>\"",
                        ))
                    }
                }
            };
            let body = line.trim_start();
            let indent = line.len() - body.len();
            let rest = body.strip_prefix("gen").ok_or_else(|| {
                ParseError::new(line_no, indent + 1, "expected \"gen <name> = <cycles> ; q = <cycles>\"")
            })?;
            let (name_part, rest) = rest.split_once('=').ok_or_else(|| {
                ParseError::new(line_no, indent + 4, "missing '=' after generator name")
            })?;
            let name = name_part.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(ParseError::new(
                    line_no,
                    indent + 4,
                    format!("invalid generator name {name:?}"),
                ));
            }
            let (perm_text, q_part) = rest.split_once(';').ok_or_else(|| {
                ParseError::new(line_no, line.len(), "missing \"; q = ...\"")
            })?;
            let q_text = q_part.trim_start().strip_prefix('q').and_then(|s| s.trim_start().strip_prefix('=')).ok_or_else(|| {
                ParseError::new(line_no, column_of(line, q_part, 0), "expected \"q = <cycles>\"")
            })?;
            let perm = Perm::parse_cycles(n, perm_text)
                .map_err(|m| ParseError::new(line_no, column_of(line, perm_text.trim(), 0), m))?;
            let q = Perm::parse_cycles(d, q_text)
                .map_err(|m| ParseError::new(line_no, column_of(line, q_text.trim(), 0), m))?;
            gens.push(Generator::new(name, perm, q));
        }
        let (d, n) = header.ok_or_else(|| ParseError::new(1, 1, "empty group file"))?;
        Ok((d, n, gens))
    }

    /// The text form accepted by [`LocalGroup::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("d {} N {}\n", self.arity, self.degree);
        for g in &self.generators {
            out.push_str(&format!("gen {} = {} ; q = {}\n", g.name, g.perm, g.q));
        }
        out
    }

    pub fn with_name(mut self: Arc<Self>, name: impl Into<String>) -> Arc<Self> {
        if let Some(g) = Arc::get_mut(&mut self) {
            g.name = Some(name.into());
            self
        } else {
            let g = &*self;
            Arc::new(LocalGroup {
                arity: g.arity,
                degree: g.degree,
                generators: g.generators.clone(),
                elements: g.elements.clone(),
                q_images: g.q_images.clone(),
                index: g.index.clone(),
                inverses: g.inverses.clone(),
                words: g.words.clone(),
                table: g.table.clone(),
                q_faithful: g.q_faithful,
                options: g.options,
                name: Some(name.into()),
                image: OnceLock::new(),
            })
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn options(&self) -> GroupOptions {
        self.options
    }

    pub fn depth_limit(&self) -> usize {
        self.options.depth_limit
    }

    /// Whether `q` is injective.
    pub fn q_is_faithful(&self) -> bool {
        self.q_faithful
    }

    /// Structural sameness: identical generator data.
    pub fn same_as(&self, other: &LocalGroup) -> bool {
        std::ptr::eq(self, other)
            || (self.arity == other.arity
                && self.degree == other.degree
                && self.generators == other.generators)
    }

    pub fn perm(&self, idx: u32) -> &Perm {
        &self.elements[idx as usize]
    }

    #[inline]
    pub fn q(&self, idx: u32) -> &Perm {
        &self.q_images[idx as usize]
    }

    pub fn index_of(&self, p: &Perm) -> Option<u32> {
        self.index.get(p).copied()
    }

    #[inline]
    pub fn mul_idx(&self, a: u32, b: u32) -> u32 {
        match &self.table {
            Some(t) => t[a as usize * self.elements.len() + b as usize],
            None => self.index[&self.elements[a as usize].compose(&self.elements[b as usize])],
        }
    }

    #[inline]
    pub fn inv_idx(&self, a: u32) -> u32 {
        self.inverses[a as usize]
    }

    /// A shortest generator word for an element, e.g. `"a*b"`, or `"id"`.
    pub fn word(&self, idx: u32) -> String {
        word_text(&self.generators, &self.words[idx as usize])
    }

    /// Evaluates `"id"` or a `*`-separated generator word.
    pub fn eval_word(&self, text: &str) -> Result<u32, GroupError> {
        let text = text.trim();
        if text == "id" {
            return Ok(0);
        }
        let mut acc = 0u32;
        for name in text.split('*') {
            let name = name.trim();
            let gi = self
                .generators
                .iter()
                .position(|g| g.name == name)
                .ok_or_else(|| GroupError::UnknownGenerator(name.to_string()))?;
            let g = self.index[&self.generators[gi].perm];
            acc = self.mul_idx(acc, g);
        }
        Ok(acc)
    }

    pub fn identity(self: &Arc<Self>) -> LocalElement {
        LocalElement {
            group: Arc::clone(self),
            index: 0,
        }
    }

    pub fn element(self: &Arc<Self>, index: u32) -> LocalElement {
        assert!((index as usize) < self.elements.len(), "element index out of range");
        LocalElement {
            group: Arc::clone(self),
            index,
        }
    }

    /// All elements in breadth-first discovery order.
    pub fn elements(self: &Arc<Self>) -> Vec<LocalElement> {
        (0..self.elements.len() as u32).map(|i| self.element(i)).collect()
    }

    /// The element named by a generator.
    pub fn generator_element(self: &Arc<Self>, name: &str) -> Result<LocalElement, GroupError> {
        Ok(self.element(self.eval_word(name)?))
    }

    fn image_data(&self) -> &ImageData {
        self.image.get_or_init(|| {
            let gens = self
                .generators
                .iter()
                .map(|g| Generator::new(g.name.clone(), g.q.clone(), g.q.clone()))
                .collect();
            let options = GroupOptions {
                max_order: self.options.max_order.max(self.elements.len()),
                ..self.options
            };
            let mut image = LocalGroup::build_with(self.arity as usize, self.arity as usize, gens, options)
                .expect("the image of a verified homomorphism is a group");
            if let Some(name) = &self.name {
                image = image.with_name(format!("image of {name}"));
            }
            let image_of: Vec<u32> = self
                .q_images
                .iter()
                .map(|q| image.index_of(q).expect("q-image lies in the image group"))
                .collect();
            let mut section = vec![u32::MAX; image.order()];
            for (h, &img) in image_of.iter().enumerate() {
                if section[img as usize] == u32::MAX {
                    section[img as usize] = h as u32;
                }
            }
            ImageData {
                group: image,
                image_of,
                section,
            }
        })
    }

    /// `H̄ = q(H)` as a local group of degree `d` whose `q` is the identity.
    pub fn image_group(&self) -> Arc<LocalGroup> {
        Arc::clone(&self.image_data().group)
    }

    /// Index in [`LocalGroup::image_group`] of `q(h)`.
    pub fn image_index(&self, idx: u32) -> u32 {
        self.image_data().image_of[idx as usize]
    }

    /// The chosen preimage of an image-group element: the first element in
    /// enumeration order mapping onto it.
    pub fn section_index(&self, image_idx: u32) -> u32 {
        self.image_data().section[image_idx as usize]
    }
}

fn word_text(gens: &[Generator], word: &[u16]) -> String {
    if word.is_empty() {
        return "id".into();
    }
    word.iter()
        .map(|&g| gens[g as usize].name.as_str())
        .collect::<Vec<_>>()
        .join("*")
}

/// A handle to an element of a [`LocalGroup`].
#[derive(Clone)]
pub struct LocalElement {
    group: Arc<LocalGroup>,
    index: u32,
}

impl PartialEq for LocalElement {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.group.same_as(&other.group)
    }
}

impl Eq for LocalElement {}

impl std::hash::Hash for LocalElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.index.hash(state);
    }
}

impl fmt::Debug for LocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.group.word(self.index))
    }
}

impl fmt::Display for LocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.group.word(self.index))
    }
}

impl LocalElement {
    pub fn group(&self) -> &Arc<LocalGroup> {
        &self.group
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    fn check(&self, other: &LocalElement) -> Result<(), GroupError> {
        if self.group.same_as(&other.group) {
            Ok(())
        } else {
            Err(GroupError::GroupMismatch)
        }
    }

    /// `self ∘ other` (apply `other` first, as for permutations).
    pub fn mul(&self, other: &LocalElement) -> Result<LocalElement, GroupError> {
        self.check(other)?;
        Ok(LocalElement {
            group: Arc::clone(&self.group),
            index: self.group.mul_idx(self.index, other.index),
        })
    }

    /// Product written left to right: `self` first, then `next`.
    pub fn then(&self, next: &LocalElement) -> Result<LocalElement, GroupError> {
        next.mul(self)
    }

    pub fn inv(&self) -> LocalElement {
        LocalElement {
            group: Arc::clone(&self.group),
            index: self.group.inv_idx(self.index),
        }
    }

    pub fn q_image(&self) -> &Perm {
        self.group.q(self.index)
    }

    pub fn perm(&self) -> &Perm {
        self.group.perm(self.index)
    }

    pub fn is_identity(&self) -> bool {
        self.index == 0
    }
}
