//! Spider graphs and the geometry of connected consensus decisions.
//!
//! A centered spider graph `G(V, R)` has a center vertex `(⊥, 0)` with one
//! path ("branch") of `R` vertices `(v, 1) … (v, R)` hanging off it for every
//! value `v`. The centerless variant drops the center and joins all `(v, 1)`
//! vertices in a clique instead.
//!
//! Decisions of connected consensus are vertices of such a graph. Validity
//! asks that decisions lie in the minimal subtree spanning the leaves of the
//! input values; agreement asks that any two decisions are at distance at
//! most one.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// An input value, identified by its position in the ordered value set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(pub u16);

impl Value {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A value or the distinguished "undecided" symbol `⊥`.
///
/// Ordered with every value before `⊥`, which matches the counter layout
/// used by the protocols (`⊥` occupies the slot after the last value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BranchValue {
    Val(Value),
    Bottom,
}

impl BranchValue {
    pub fn value(self) -> Option<Value> {
        match self {
            BranchValue::Val(v) => Some(v),
            BranchValue::Bottom => None,
        }
    }

    pub fn is_bottom(self) -> bool {
        matches!(self, BranchValue::Bottom)
    }

    /// Slot of this symbol in an array indexed over `V ∪ {⊥}`.
    pub fn slot(self, value_count: usize) -> usize {
        match self {
            BranchValue::Val(v) => v.index(),
            BranchValue::Bottom => value_count,
        }
    }

    /// Inverse of [`BranchValue::slot`].
    pub fn from_slot(slot: usize, value_count: usize) -> BranchValue {
        if slot == value_count {
            BranchValue::Bottom
        } else {
            BranchValue::Val(Value(slot as u16))
        }
    }

    /// All symbols of `V ∪ {⊥}` in slot order.
    pub fn all(value_count: usize) -> impl Iterator<Item = BranchValue> {
        (0..=value_count).map(move |s| BranchValue::from_slot(s, value_count))
    }
}

impl From<Value> for BranchValue {
    fn from(v: Value) -> Self {
        BranchValue::Val(v)
    }
}

impl fmt::Display for BranchValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchValue::Val(v) => write!(f, "{v}"),
            BranchValue::Bottom => f.write_str("bot"),
        }
    }
}

/// A decision point `(value, grade)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub value: BranchValue,
    pub grade: u8,
}

impl Vertex {
    /// The center `(⊥, 0)`.
    pub const CENTER: Vertex = Vertex {
        value: BranchValue::Bottom,
        grade: 0,
    };

    pub fn on_branch(value: Value, grade: u8) -> Vertex {
        Vertex {
            value: BranchValue::Val(value),
            grade,
        }
    }

    pub fn is_center(self) -> bool {
        self == Vertex::CENTER
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.value, self.grade)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureModel {
    Crash,
    Malicious,
}

impl fmt::Display for FailureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureModel::Crash => f.write_str("crash"),
            FailureModel::Malicious => f.write_str("malicious"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpiderError {
    #[error("value set must hold at least two values, got {0}")]
    TooFewValues(usize),
    #[error("refinement must be 1 or 2, got {0}")]
    UnsupportedRefinement(u8),
    #[error("need at least one process")]
    NoProcesses,
    #[error("fault budget f={f} must be below n={n}")]
    TooManyFaults { n: usize, f: usize },
    #[error("value {value} outside the value set of size {value_count}")]
    ValueOutOfRange { value: u16, value_count: usize },
    #[error("grade {grade} exceeds refinement {refinement}")]
    GradeOutOfRange { grade: u8, refinement: u8 },
    #[error("vertex {0} is not part of the graph")]
    NotAVertex(Vertex),
    #[error("minimal subtree needs at least one leaf")]
    EmptyLeaves,
}

/// The shape of a spider graph: value count, refinement and whether it has
/// a center vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpiderGraph {
    value_count: usize,
    refinement: u8,
    centered: bool,
}

impl SpiderGraph {
    pub fn new(value_count: usize, refinement: u8, centered: bool) -> Result<Self, SpiderError> {
        if value_count < 2 {
            return Err(SpiderError::TooFewValues(value_count));
        }
        if !(1..=2).contains(&refinement) {
            return Err(SpiderError::UnsupportedRefinement(refinement));
        }
        Ok(SpiderGraph {
            value_count,
            refinement,
            centered,
        })
    }

    pub fn value_count(&self) -> usize {
        self.value_count
    }

    pub fn refinement(&self) -> u8 {
        self.refinement
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// The same shape with the opposite centering.
    pub fn with_centered(self, centered: bool) -> SpiderGraph {
        SpiderGraph { centered, ..self }
    }

    pub fn values(&self) -> impl Iterator<Item = Value> {
        (0..self.value_count as u16).map(Value)
    }

    /// The leaf `(v, R)` of branch `v`.
    pub fn leaf(&self, v: Value) -> Vertex {
        Vertex::on_branch(v, self.refinement)
    }

    pub fn check_value(&self, v: Value) -> Result<(), SpiderError> {
        if v.index() < self.value_count {
            Ok(())
        } else {
            Err(SpiderError::ValueOutOfRange {
                value: v.0,
                value_count: self.value_count,
            })
        }
    }

    /// Checks that `x` is a vertex of this graph.
    pub fn check_vertex(&self, x: Vertex) -> Result<(), SpiderError> {
        if x.grade > self.refinement {
            return Err(SpiderError::GradeOutOfRange {
                grade: x.grade,
                refinement: self.refinement,
            });
        }
        match x.value {
            BranchValue::Bottom if self.centered && x.grade == 0 => Ok(()),
            BranchValue::Bottom => Err(SpiderError::NotAVertex(x)),
            BranchValue::Val(v) => {
                self.check_value(v)?;
                if x.grade == 0 {
                    Err(SpiderError::NotAVertex(x))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn contains_vertex(&self, x: Vertex) -> bool {
        self.check_vertex(x).is_ok()
    }

    /// Every vertex, center first, then branch by branch from grade 1 outwards.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.value_count * self.refinement as usize + 1);
        if self.centered {
            out.push(Vertex::CENTER);
        }
        for v in self.values() {
            for g in 1..=self.refinement {
                out.push(Vertex::on_branch(v, g));
            }
        }
        out
    }

    /// Graph distance between two vertices.
    ///
    /// Centered: along one branch (the center belongs to every branch) it is
    /// the grade difference, across branches the path runs through the center.
    /// Centerless: across branches the path runs through the clique edge
    /// joining the two grade-1 vertices.
    pub fn distance(&self, a: Vertex, b: Vertex) -> Result<u32, SpiderError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        let (ga, gb) = (a.grade as u32, b.grade as u32);
        let same_branch = a.value == b.value || a.is_center() || b.is_center();
        Ok(if same_branch {
            ga.abs_diff(gb)
        } else if self.centered {
            ga + gb
        } else {
            (ga - 1) + (gb - 1) + 1
        })
    }

    /// The minimal subtree connecting the leaves of `leaves`.
    ///
    /// A single leaf value gives just its leaf vertex. Several give their
    /// whole branches, joined through the center (centered) or through the
    /// clique edges among their grade-1 vertices (centerless).
    pub fn minimal_subtree(&self, leaves: &BTreeSet<Value>) -> Result<Subtree, SpiderError> {
        for &v in leaves {
            self.check_value(v)?;
        }
        let mut vertices = BTreeSet::new();
        match leaves.len() {
            0 => return Err(SpiderError::EmptyLeaves),
            1 => {
                let v = *leaves.iter().next().expect("one leaf");
                vertices.insert(self.leaf(v));
            }
            _ => {
                if self.centered {
                    vertices.insert(Vertex::CENTER);
                }
                for &v in leaves {
                    for g in 1..=self.refinement {
                        vertices.insert(Vertex::on_branch(v, g));
                    }
                }
            }
        }
        Ok(Subtree { vertices })
    }
}

impl fmt::Display for SpiderGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}spider(|V|={}, R={})",
            if self.centered { "" } else { "centerless-" },
            self.value_count,
            self.refinement
        )
    }
}

/// A vertex set produced by [`SpiderGraph::minimal_subtree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtree {
    vertices: BTreeSet<Vertex>,
}

impl Subtree {
    pub fn contains(&self, x: Vertex) -> bool {
        self.vertices.contains(&x)
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// A connected consensus problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TaskSpec {
    pub value_count: usize,
    pub refinement: u8,
    pub centered: bool,
    pub n: usize,
    pub f: usize,
    pub failure_model: FailureModel,
}

impl TaskSpec {
    /// A centered instance.
    pub fn new(
        value_count: usize,
        refinement: u8,
        n: usize,
        f: usize,
        failure_model: FailureModel,
    ) -> Result<Self, SpiderError> {
        let spec = TaskSpec {
            value_count,
            refinement,
            centered: true,
            n,
            f,
            failure_model,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpiderError> {
        SpiderGraph::new(self.value_count, self.refinement, self.centered)?;
        if self.n == 0 {
            return Err(SpiderError::NoProcesses);
        }
        if self.f >= self.n {
            return Err(SpiderError::TooManyFaults {
                n: self.n,
                f: self.f,
            });
        }
        Ok(())
    }

    pub fn graph(&self) -> SpiderGraph {
        SpiderGraph {
            value_count: self.value_count,
            refinement: self.refinement,
            centered: self.centered,
        }
    }

    pub fn distance(&self, a: Vertex, b: Vertex) -> Result<u32, SpiderError> {
        self.graph().distance(a, b)
    }

    pub fn minimal_subtree(&self, leaves: &BTreeSet<Value>) -> Result<Subtree, SpiderError> {
        self.graph().minimal_subtree(leaves)
    }
}
