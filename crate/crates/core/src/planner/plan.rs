use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Scan,
    Join,
    Aggregate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Access {
    FullScan,
    IndexScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JoinMethod {
    HashJoin,
    NestedLoopJoin,
    MergeJoin,
}

impl JoinMethod {
    pub const ALL: [JoinMethod; 3] = [
        JoinMethod::HashJoin,
        JoinMethod::NestedLoopJoin,
        JoinMethod::MergeJoin,
    ];
}

/// One node of a left-deep plan tree.
///
/// Scan leaves name their FROM binding in `table`; join nodes carry the
/// equality predicates they apply as `binding.column = binding.column`
/// strings; an optional aggregate node sits at the root. `card`,
/// `base_rows` and `index_rows` are the annotations the cost model reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanNode {
    pub op: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access: Option<Access>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<JoinMethod>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predicates: Vec<String>,
    #[serde(default)]
    pub children: Vec<PlanNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub card: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_rows: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_rows: Option<u64>,
}

impl PlanNode {
    fn bare(op: Op) -> Self {
        Self {
            op,
            table: None,
            access: None,
            index_column: None,
            method: None,
            predicates: Vec::new(),
            children: Vec::new(),
            card: None,
            cost: None,
            base_rows: None,
            index_rows: None,
        }
    }

    pub fn scan(binding: impl Into<String>, access: Access, index_column: Option<String>) -> Self {
        Self {
            table: Some(binding.into()),
            access: Some(access),
            index_column,
            ..Self::bare(Op::Scan)
        }
    }

    pub fn join(method: JoinMethod, left: PlanNode, right: PlanNode, predicates: Vec<String>) -> Self {
        Self {
            method: Some(method),
            predicates,
            children: vec![left, right],
            ..Self::bare(Op::Join)
        }
    }

    pub fn aggregate(child: PlanNode) -> Self {
        Self {
            children: vec![child],
            ..Self::bare(Op::Aggregate)
        }
    }

    /// Scan leaves, left to right.
    pub fn leaves(&self) -> Vec<&PlanNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a PlanNode>) {
        if self.op == Op::Scan {
            out.push(self);
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }

    /// Join nodes, bottom-up.
    pub fn joins(&self) -> Vec<&PlanNode> {
        let mut out = Vec::new();
        self.collect_joins(&mut out);
        out
    }

    fn collect_joins<'a>(&'a self, out: &mut Vec<&'a PlanNode>) {
        for c in &self.children {
            c.collect_joins(out);
        }
        if self.op == Op::Join {
            out.push(self);
        }
    }

    /// `binding.column` of an index scan leaf.
    pub(crate) fn index_key(&self) -> Option<String> {
        match (self.op, self.access, &self.table, &self.index_column) {
            (Op::Scan, Some(Access::IndexScan), Some(t), Some(c)) => {
                Some(format!("{}.{}", t, c).to_ascii_lowercase())
            }
            _ => None,
        }
    }

    /// True when this join node applies a predicate on `key` (`binding.column`).
    pub(crate) fn joins_on(&self, key: &str) -> bool {
        self.predicates.iter().any(|p| {
            p.split(" = ")
                .any(|side| side.trim().eq_ignore_ascii_case(key))
        })
    }
}
