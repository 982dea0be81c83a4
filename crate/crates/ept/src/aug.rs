//! Augmentation: below every internal node, the edge to the child with the
//! smaller leaf weight gains one subdivision node. The augmented cost stays
//! within 3/2 of the original cost, which is what makes balanced cuts a
//! 1.5-approximation; the audit harness checks that bound instance by
//! instance.

use crate::ept::{Ept, EptNode, NodeId};
use crate::error::TreeError;
use crate::tree::{EdgeRef, InputTree, VertexId};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AugNode {
    Leaf(VertexId),
    Internal {
        edge: EdgeRef,
        left: NodeId,
        right: NodeId,
    },
    Subdiv {
        child: NodeId,
    },
}

/// An augmented EPT: the original tree with exactly one subdivision node
/// wrapped around one child of every internal node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugTree {
    nodes: Vec<AugNode>,
    root: NodeId,
}

impl AugTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &AugNode {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn to_json(&self) -> String {
        crate::json::aug_to_json(self)
    }

    pub(crate) fn from_raw(nodes: Vec<AugNode>, root: NodeId) -> AugTree {
        AugTree { nodes, root }
    }

    /// Drops the subdivision nodes, recovering the original EPT structure.
    pub fn erase_subdivisions(&self) -> Ept {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut map = vec![NodeId(u32::MAX); self.nodes.len()];
        // Subdivision nodes forward to their child; create the rest 1:1.
        for (i, node) in self.nodes.iter().enumerate() {
            if !matches!(node, AugNode::Subdiv { .. }) {
                map[i] = NodeId(nodes.len() as u32);
                nodes.push(EptNode::Leaf(VertexId(0))); // placeholder
            }
        }
        let resolve = |mut id: NodeId| -> NodeId {
            while let AugNode::Subdiv { child } = self.nodes[id.index()] {
                id = child;
            }
            map[id.index()]
        };
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                AugNode::Subdiv { .. } => {}
                AugNode::Leaf(v) => nodes[map[i].index()] = EptNode::Leaf(v),
                AugNode::Internal { edge, left, right } => {
                    nodes[map[i].index()] = EptNode::Internal {
                        edge,
                        left: resolve(left),
                        right: resolve(right),
                    }
                }
            }
        }
        Ept::from_parts(nodes, resolve(self.root))
    }
}

/// Builds the augmented tree: every internal node's lighter child (by leaf
/// weight below it) is wrapped in a subdivision node; on ties the right
/// child is wrapped. The wrapped side's weight therefore never exceeds half
/// the node's weight.
pub fn augment(g: &InputTree, t: &Ept) -> Result<AugTree, TreeError> {
    let below = crate::ept::leaf_weight_below(g, t)?;
    let mut nodes: Vec<AugNode> = Vec::with_capacity(2 * t.len());
    for id in 0..t.len() {
        nodes.push(match *t.node(NodeId(id as u32)) {
            EptNode::Leaf(v) => AugNode::Leaf(v),
            EptNode::Internal { edge, left, right } => AugNode::Internal { edge, left, right },
        });
    }
    for id in 0..t.len() {
        let EptNode::Internal { left, right, .. } = *t.node(NodeId(id as u32)) else {
            continue;
        };
        let wrap_left = below[left.index()] < below[right.index()];
        let target = if wrap_left { left } else { right };
        debug_assert!(
            below[target.index()] * 2 <= below[id],
            "wrapped side must not be the heavier one"
        );
        let subdiv = NodeId(nodes.len() as u32);
        nodes.push(AugNode::Subdiv { child: target });
        if let AugNode::Internal { left, right, .. } = &mut nodes[id] {
            if wrap_left {
                *left = subdiv;
            } else {
                *right = subdiv;
            }
        }
    }
    Ok(AugTree {
        nodes,
        root: t.root(),
    })
}

/// Weighted leaf depth of the augmented tree; subdivision nodes count as a
/// full level.
pub fn aug_sum(g: &InputTree, a: &AugTree) -> Result<Weight, TreeError> {
    let mut total = Weight::ZERO;
    let mut stack = vec![(a.root, 0u64)];
    while let Some((id, depth)) = stack.pop() {
        match *a.node(id) {
            AugNode::Leaf(v) => {
                let contrib = g
                    .vertex_weight(v)
                    .checked_mul(Weight::new(depth))
                    .map_err(|_| TreeError::WeightOverflow)?;
                total = total
                    .checked_add(contrib)
                    .map_err(|_| TreeError::WeightOverflow)?;
            }
            AugNode::Internal { left, right, .. } => {
                stack.push((left, depth + 1));
                stack.push((right, depth + 1));
            }
            AugNode::Subdiv { child } => stack.push((child, depth + 1)),
        }
    }
    Ok(total)
}
