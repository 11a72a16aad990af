//! Outer-product fusion of a video and an audio embedding.
//!
//! Both embeddings are extended with a trailing constant 1 and the fusion
//! tensor is `[z_v; 1] ⊗ [z_a; 1]`, stored row-major with video along the
//! rows. For embeddings of length `V` and `A` the tensor regions are:
//!
//! | rows    | cols    | contents          |
//! |---------|---------|-------------------|
//! | `0..V`  | `0..A`  | `z_v ⊗ z_a`       |
//! | `0..V`  | `A`     | `z_v` (video × 1) |
//! | `V`     | `0..A`  | `z_a` (1 × audio) |
//! | `V`     | `A`     | `1`               |

use crate::numkit::{outer, Matrix, Scalar, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct FusionTensor<T> {
    data: Matrix<T>,
}

impl<T: Scalar> FusionTensor<T> {
    pub fn video_len(&self) -> usize {
        self.data.rows() - 1
    }

    pub fn audio_len(&self) -> usize {
        self.data.cols() - 1
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.data
    }

    /// Row-major flattening, the detection head's input.
    pub fn flatten(&self) -> Vector<T> {
        self.data.flatten()
    }

    pub fn into_flat(self) -> Vector<T> {
        self.data.into_flat()
    }

    /// The `z_v ⊗ z_a` block, flattened row-major.
    pub fn bimodal_block(&self) -> Vector<T> {
        let a = self.audio_len();
        let mut out = Vec::with_capacity(self.video_len() * a);
        for i in 0..self.video_len() {
            out.extend_from_slice(&self.data.row(i)[..a]);
        }
        Vector::new(out)
    }

    /// The bias column: `z_v`.
    pub fn video_region(&self) -> Vector<T> {
        let a = self.audio_len();
        Vector::new((0..self.video_len()).map(|i| self.data[(i, a)]).collect())
    }

    /// The bias row: `z_a`.
    pub fn audio_region(&self) -> Vector<T> {
        Vector::new(self.data.row(self.video_len())[..self.audio_len()].to_vec())
    }

    pub fn bias_entry(&self) -> T {
        self.data[(self.video_len(), self.audio_len())]
    }
}

pub(crate) fn extend_with_one<T: Scalar>(z: &Vector<T>) -> Vector<T> {
    let mut data = Vec::with_capacity(z.len() + 1);
    data.extend_from_slice(z.as_slice());
    data.push(T::one());
    Vector::new(data)
}

/// `[z_v; 1] ⊗ [z_a; 1]`.
pub fn tensor_fuse<T: Scalar>(z_v: &Vector<T>, z_a: &Vector<T>) -> FusionTensor<T> {
    FusionTensor {
        data: outer(&extend_with_one(z_v), &extend_with_one(z_a)),
    }
}

/// Pulls an upstream gradient `g` on the fusion tensor back to the two
/// embeddings: `dz_v[i] = Σ_j g[i][j]·[z_a;1][j]` and
/// `dz_a[j] = Σ_i g[i][j]·[z_v;1][i]`, dropping the bias slots.
pub fn fusion_backward<T: Scalar>(
    g: &Matrix<T>,
    z_v: &Vector<T>,
    z_a: &Vector<T>,
) -> (Vector<T>, Vector<T>) {
    debug_assert_eq!(g.shape(), (z_v.len() + 1, z_a.len() + 1));
    let ext_v = extend_with_one(z_v);
    let ext_a = extend_with_one(z_a);
    let mut dv = crate::numkit::matvec_unchecked(g, ext_a.as_slice());
    dv.truncate(z_v.len());
    let mut da = g.transpose_mul(ext_v.as_slice()).into_vec();
    da.truncate(z_a.len());
    (Vector::new(dv), Vector::new(da))
}
