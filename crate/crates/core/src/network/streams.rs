//! Random streams for block placement.
//!
//! The master seed fixes a ChaCha8 key; every (layer, node, input) triple
//! selects its own stream under that key, so blocks can be fitted in any
//! order or on any thread without changing the draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const INDEX_BITS: u32 = 24;

/// Supplies the random stream used to place the basis functions of the
/// block owned by `node` for input column `input`.
pub trait StreamSource: Sync {
    fn stream(&self, node: usize, input: usize) -> ChaCha8Rng;
}

#[derive(Debug, Clone, Copy)]
pub struct LayerStreams {
    seed: u64,
    layer: usize,
}

impl LayerStreams {
    pub fn new(seed: u64, layer: usize) -> Self {
        Self { seed, layer }
    }
}

/// Packs `(layer, node, input)` into a 64-bit stream id.
fn stream_id(layer: usize, node: usize, input: usize) -> u64 {
    let limit = 1usize << INDEX_BITS;
    assert!(
        node < limit && input < limit && layer < (1 << (64 - 2 * INDEX_BITS)),
        "layer/node/input index out of stream-id range"
    );
    ((layer as u64) << (2 * INDEX_BITS)) | ((node as u64) << INDEX_BITS) | input as u64
}

impl StreamSource for LayerStreams {
    fn stream(&self, node: usize, input: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream_id(self.layer, node, input));
        rng
    }
}

/// Hands every node the same streams; all nodes of a layer then coincide.
#[derive(Debug, Clone, Copy)]
pub struct SharedStreams {
    inner: LayerStreams,
}

impl SharedStreams {
    pub fn new(seed: u64, layer: usize) -> Self {
        Self {
            inner: LayerStreams::new(seed, layer),
        }
    }
}

impl StreamSource for SharedStreams {
    fn stream(&self, _node: usize, input: usize) -> ChaCha8Rng {
        self.inner.stream(0, input)
    }
}
