use ndarray::{Array2, ArrayView2, Axis};

use crate::model::Dataset;
use crate::scalar::Scalar;

/// Per-group genotype blocks and their Gram matrices.
#[derive(Debug, Clone)]
pub struct GroupGram<T> {
    /// Genotype columns of the group stored transposed, `m_k × n`.
    pub x_block_t: Array2<T>,
    /// `S_k = Σ_ℓ x_ℓ^(k) x_ℓ^(k)ᵀ`, `m_k × m_k`.
    pub gram: Array2<T>,
    /// `Σ_ℓ x_ℓ^(k) y_ℓᵀ`, `m_k × c`.
    pub xty: Array2<T>,
}

/// Quantities of the block conditionals that depend only on the data.
///
/// The full block precision is `(S_k + D_k) ⊗ I_c`, so only the small
/// `m_k × m_k` factor is stored. The cross-group term of the conditional
/// mean is handled through the running residual instead of cross-Gram blocks.
#[derive(Debug, Clone)]
pub struct GramCache<T> {
    blocks: Vec<GroupGram<T>>,
    xt: Array2<T>,
}

impl<T: Scalar> GramCache<T> {
    pub fn new(data: &Dataset<T>) -> Self {
        Self::from_parts(data.x(), data.y(), data.groups())
    }

    pub fn from_parts(
        x: ArrayView2<'_, T>,
        y: ArrayView2<'_, T>,
        groups: &crate::model::GroupStructure,
    ) -> Self {
        let blocks = groups
            .iter()
            .map(|members| {
                let x_block = x.select(Axis(1), members);
                let gram = x_block.t().dot(&x_block);
                let xty = x_block.t().dot(&y);
                let x_block_t = x_block.reversed_axes().as_standard_layout().into_owned();
                GroupGram { x_block_t, gram, xty }
            })
            .collect();
        let xt = x.t().as_standard_layout().into_owned();
        Self { blocks, xt }
    }

    pub fn block(&self, k: usize) -> &GroupGram<T> {
        &self.blocks[k]
    }

    /// All genotypes transposed, `d × n`.
    pub fn xt(&self) -> ArrayView2<'_, T> {
        self.xt.view()
    }

    pub fn n_groups(&self) -> usize {
        self.blocks.len()
    }
}
