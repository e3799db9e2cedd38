use crate::num::Scalar;

/// Which rows go left at an internal node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule<T> {
    /// Numeric: `x <= threshold` goes left.
    LessEq(T),
    /// Categorical one-vs-rest: the given level code goes left.
    IsLevel(u32),
}

impl<T: Scalar> SplitRule<T> {
    #[inline]
    pub fn goes_left(&self, x: T) -> bool {
        match *self {
            SplitRule::LessEq(t) => x <= t,
            SplitRule::IsLevel(level) => x.to_u32() == Some(level),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    /// Left child is the next node in the array; `right` is its index.
    Split {
        var: usize,
        rule: SplitRule<T>,
        right: usize,
    },
    Leaf {
        positives: u32,
        n: u32,
        proportion: T,
    },
}

impl<T: Scalar> Node<T> {
    pub fn leaf(positives: u32, n: u32) -> Self {
        Node::Leaf {
            positives,
            n,
            proportion: T::from_u32(positives).expect("count") / T::from_u32(n).expect("count"),
        }
    }
}

/// Nodes stored in pre-order.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> DecisionTree<T> {
    pub(crate) fn from_nodes(nodes: Vec<Node<T>>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    /// A single-leaf tree, mostly useful for tests.
    pub fn constant(positives: u32, n: u32) -> Self {
        Self {
            nodes: vec![Node::leaf(positives, n)],
        }
    }

    #[inline]
    pub fn predict(&self, row: &[T]) -> T {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { proportion, .. } => return *proportion,
                Node::Split { var, rule, right } => {
                    i = if rule.goes_left(row[*var]) { i + 1 } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], i: usize) -> (usize, usize) {
            // returns (depth, index after subtree)
            match &nodes[i] {
                Node::Leaf { .. } => (0, i + 1),
                Node::Split { right, .. } => {
                    let (dl, _) = walk(nodes, i + 1);
                    let (dr, end) = walk(nodes, *right);
                    (1 + dl.max(dr), end)
                }
            }
        }
        walk(&self.nodes, 0).0
    }
}
