//! Append-only recording tape for reverse-mode differentiation.
//!
//! A `Tape` is thread-confined: at most one records per thread at a time.
//! Ops consult the active tape; when live and at least one input is tracked,
//! they append a node holding a boxed backward closure. `backward` walks the
//! tape in reverse (ids are already topologically ordered), consuming
//! intermediate gradients and keeping leaf gradients for retrieval.

use std::cell::RefCell;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::Tensor;

pub type NodeId = usize;

/// Position of a recorded value on a specific tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct TapeRef {
    pub tape: u64,
    pub node: NodeId,
}

/// Distributes the gradient of one node to its inputs.
pub(crate) trait Backward {
    fn backward(&self, grad: &[f32], store: &mut GradStore);
}

struct Node {
    numel: usize,
    backward: Option<Box<dyn Backward>>,
}

pub(crate) struct TapeInner {
    id: u64,
    nodes: RefCell<Vec<Node>>,
}

impl TapeInner {
    fn push(&self, numel: usize, backward: Option<Box<dyn Backward>>) -> NodeId {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { numel, backward });
        nodes.len() - 1
    }
}

thread_local! {
    static ACTIVE: RefCell<Option<Rc<TapeInner>>> = const { RefCell::new(None) };
}

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(1);

/// Gradient accumulation buffers, one per tape node, allocated lazily.
pub(crate) struct GradStore {
    numels: Vec<usize>,
    grads: Vec<Option<Vec<f32>>>,
}

impl GradStore {
    /// Accumulation buffer for node `id`, zero-initialized on first access.
    pub fn buf(&mut self, id: NodeId) -> &mut [f32] {
        let numel = self.numels[id];
        self.grads[id].get_or_insert_with(|| vec![0.0; numel])
    }
}

/// Records every op over watched tensors while alive; one per thread.
pub struct Tape {
    inner: Rc<TapeInner>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Tape {
        let inner = Rc::new(TapeInner {
            id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: RefCell::new(Vec::new()),
        });
        ACTIVE.with(|a| {
            let mut a = a.borrow_mut();
            assert!(a.is_none(), "a tape is already recording on this thread");
            *a = Some(inner.clone());
        });
        Tape { inner }
    }

    /// Register `t` as a differentiable leaf; the returned handle is tracked.
    pub fn watch(&self, t: &Tensor) -> Tensor {
        let node = self.inner.push(t.numel(), None);
        Tensor {
            shape: t.shape,
            data: t.data.clone(),
            node: Some(TapeRef { tape: self.inner.id, node }),
        }
    }

    /// Reverse pass from a scalar loss; returns leaf gradients.
    pub fn backward(&self, loss: &Tensor) -> Grads {
        let root = loss
            .node
            .filter(|r| r.tape == self.inner.id)
            .expect("loss is not recorded on this tape");
        let nodes = self.inner.nodes.borrow();
        assert_eq!(nodes[root.node].numel, 1, "backward needs a scalar loss");
        let mut store = GradStore {
            numels: nodes.iter().map(|n| n.numel).collect(),
            grads: vec![None; nodes.len()],
        };
        store.grads[root.node] = Some(vec![1.0]);
        for id in (0..=root.node).rev() {
            if let Some(bk) = &nodes[id].backward {
                // Interior node: consume its gradient (leaves keep theirs).
                let Some(g) = store.grads[id].take() else { continue };
                bk.backward(&g, &mut store);
            }
        }
        Grads { tape: self.inner.id, grads: store.grads }
    }
}

impl Drop for Tape {
    fn drop(&mut self) {
        ACTIVE.with(|a| {
            let mut a = a.borrow_mut();
            if a.as_ref().is_some_and(|t| t.id == self.inner.id) {
                *a = None;
            }
        });
    }
}

/// Leaf gradients produced by one reverse pass.
pub struct Grads {
    tape: u64,
    grads: Vec<Option<Vec<f32>>>,
}

impl Grads {
    /// Gradient of the loss w.r.t. `t`, if `t` is a watched leaf that the
    /// loss actually depends on.
    pub fn get(&self, t: &Tensor) -> Option<&[f32]> {
        let r = t.node?;
        if r.tape != self.tape {
            return None;
        }
        self.grads.get(r.node)?.as_deref()
    }
}

/// Record `data` as the output of an op over `inputs`. The backward closure
/// is only materialized when a tape is live and some input is tracked on it;
/// `make_back` receives the per-input node ids (None = untracked, no gradient
/// needed for that input).
pub(crate) fn record(
    inputs: &[&Tensor],
    shape: [usize; 4],
    data: Vec<f32>,
    make_back: impl FnOnce(&[Option<NodeId>]) -> Box<dyn Backward>,
) -> Tensor {
    assert_eq!(
        data.len(),
        shape.iter().product::<usize>(),
        "op output length must match its shape"
    );
    let node = ACTIVE.with(|a| {
        let a = a.borrow();
        let tape = a.as_ref()?;
        let ids: Vec<Option<NodeId>> = inputs
            .iter()
            .map(|t| t.node.filter(|r| r.tape == tape.id).map(|r| r.node))
            .collect();
        if ids.iter().all(|i| i.is_none()) {
            return None;
        }
        let backward = make_back(&ids);
        let node = tape.push(shape.iter().product(), Some(backward));
        Some(TapeRef { tape: tape.id, node })
    });
    Tensor { shape, data: Arc::new(data), node }
}
