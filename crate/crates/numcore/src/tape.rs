//! The recording tape: forward ops and reverse-mode backpropagation.

use std::cell::{Cell, RefCell};

use crate::error::NumError;
use crate::kernels;
use crate::scalar::Real;
use crate::tensor::Tensor;
use crate::MASK_SENTINEL;

enum Node<R: Real> {
    Add {
        a: Tensor<R>,
        b: Tensor<R>,
        out: Tensor<R>,
    },
    AddRowVec {
        a: Tensor<R>,
        v: Tensor<R>,
        out: Tensor<R>,
    },
    Mul {
        a: Tensor<R>,
        b: Tensor<R>,
        out: Tensor<R>,
    },
    Scale {
        a: Tensor<R>,
        c: R,
        out: Tensor<R>,
    },
    MatMul {
        a: Tensor<R>,
        b: Tensor<R>,
        out: Tensor<R>,
        batch: usize,
        m: usize,
        k: usize,
        n: usize,
        b_batched: bool,
    },
    Silu {
        a: Tensor<R>,
        out: Tensor<R>,
    },
    RmsNorm {
        x: Tensor<R>,
        gain: Tensor<R>,
        out: Tensor<R>,
        inv_rms: Vec<R>,
    },
    Rope {
        x: Tensor<R>,
        out: Tensor<R>,
        positions: Vec<usize>,
        base: f64,
    },
    SoftmaxRows {
        x: Tensor<R>,
        out: Tensor<R>,
    },
    CausalAttention {
        q: Tensor<R>,
        k: Tensor<R>,
        v: Tensor<R>,
        out: Tensor<R>,
        probs: Vec<R>,
        inv_sqrt_dk: R,
    },
    Embedding {
        table: Tensor<R>,
        ids: Vec<u32>,
        out: Tensor<R>,
    },
    ConcatRows {
        parts: Vec<Tensor<R>>,
        out: Tensor<R>,
    },
    SliceCols {
        x: Tensor<R>,
        start: usize,
        len: usize,
        out: Tensor<R>,
    },
    ConcatCols {
        parts: Vec<Tensor<R>>,
        out: Tensor<R>,
    },
    CrossEntropy {
        logits: Tensor<R>,
        targets: Vec<u32>,
        ignore_id: u32,
        probs: Vec<R>,
        counted: usize,
        out: Tensor<R>,
    },
    Dropout {
        x: Tensor<R>,
        keep: Vec<bool>,
        scale: R,
        out: Tensor<R>,
    },
    SumAll {
        x: Tensor<R>,
        out: Tensor<R>,
    },
}

/// Result of [`Tape::cross_entropy`]: the scalar loss plus how many positions
/// actually contributed (zero means every target was the ignore id).
pub struct CrossEntropyOut<R: Real> {
    pub loss: Tensor<R>,
    pub counted: usize,
}

/// Records a computation graph for one backward pass.
///
/// A tape created with [`Tape::new`] records every op whose inputs require
/// gradients; [`Tape::eval`] creates a non-recording tape that runs the same
/// forward math (used for evaluation and deterministic inference checks).
/// Each tape supports exactly one [`Tape::backward`] call.
pub struct Tape<R: Real> {
    nodes: RefCell<Vec<Node<R>>>,
    recording: bool,
    consumed: Cell<bool>,
}

impl<R: Real> Tape<R> {
    pub fn new() -> Self {
        Tape {
            nodes: RefCell::new(Vec::new()),
            recording: true,
            consumed: Cell::new(false),
        }
    }

    /// A tape that computes values but records nothing.
    pub fn eval() -> Self {
        Tape {
            recording: false,
            ..Self::new()
        }
    }

    pub fn is_recording(&self) -> bool {
        self.recording
    }

    fn push(&self, node: Node<R>, out: &Tensor<R>, any_grad: bool) {
        if self.recording && any_grad {
            out.set_requires_grad(true);
            self.nodes.borrow_mut().push(node);
        }
    }

    // ── elementwise ─────────────────────────────────────────────────────

    pub fn add(&self, a: &Tensor<R>, b: &Tensor<R>) -> Result<Tensor<R>, NumError> {
        if a.shape() != b.shape() {
            return Err(NumError::Shape {
                op: "add",
                detail: format!("{:?} vs {:?}", a.shape(), b.shape()),
            });
        }
        let data = {
            let (da, db) = (a.data(), b.data());
            da.iter().zip(db.iter()).map(|(&x, &y)| x + y).collect()
        };
        let out = Tensor::from_vec(a.shape(), data);
        self.push(
            Node::Add {
                a: a.clone(),
                b: b.clone(),
                out: out.clone(),
            },
            &out,
            a.requires_grad() || b.requires_grad(),
        );
        Ok(out)
    }

    /// Broadcast-add a length-`d` vector onto every row of `a`.
    pub fn add_row_vec(&self, a: &Tensor<R>, v: &Tensor<R>) -> Result<Tensor<R>, NumError> {
        let (rows, cols) = rows_cols(&a.shape());
        if v.numel() != cols {
            return Err(NumError::Shape {
                op: "add_row_vec",
                detail: format!("rows of {cols} vs vector of {}", v.numel()),
            });
        }
        let data = {
            let (da, dv) = (a.data(), v.data());
            let mut out = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    out.push(da[r * cols + c] + dv[c]);
                }
            }
            out
        };
        let out = Tensor::from_vec(a.shape(), data);
        self.push(
            Node::AddRowVec {
                a: a.clone(),
                v: v.clone(),
                out: out.clone(),
            },
            &out,
            a.requires_grad() || v.requires_grad(),
        );
        Ok(out)
    }

    pub fn mul(&self, a: &Tensor<R>, b: &Tensor<R>) -> Result<Tensor<R>, NumError> {
        if a.shape() != b.shape() {
            return Err(NumError::Shape {
                op: "mul",
                detail: format!("{:?} vs {:?}", a.shape(), b.shape()),
            });
        }
        let data = {
            let (da, db) = (a.data(), b.data());
            da.iter().zip(db.iter()).map(|(&x, &y)| x * y).collect()
        };
        let out = Tensor::from_vec(a.shape(), data);
        self.push(
            Node::Mul {
                a: a.clone(),
                b: b.clone(),
                out: out.clone(),
            },
            &out,
            a.requires_grad() || b.requires_grad(),
        );
        Ok(out)
    }

    pub fn scale(&self, a: &Tensor<R>, c: R) -> Tensor<R> {
        let data = a.data().iter().map(|&x| x * c).collect();
        let out = Tensor::from_vec(a.shape(), data);
        self.push(
            Node::Scale {
                a: a.clone(),
                c,
                out: out.clone(),
            },
            &out,
            a.requires_grad(),
        );
        out
    }

    pub fn silu(&self, a: &Tensor<R>) -> Tensor<R> {
        let data = a.data().iter().map(|&x| kernels::silu(x)).collect();
        let out = Tensor::from_vec(a.shape(), data);
        self.push(
            Node::Silu {
                a: a.clone(),
                out: out.clone(),
            },
            &out,
            a.requires_grad(),
        );
        out
    }

    pub fn sum_all(&self, a: &Tensor<R>) -> Tensor<R> {
        let mut s = R::ZERO;
        for &v in a.data().iter() {
            s += v;
        }
        let out = Tensor::scalar(s);
        self.push(
            Node::SumAll {
                x: a.clone(),
                out: out.clone(),
            },
            &out,
            a.requires_grad(),
        );
        out
    }

    // ── matrix product ──────────────────────────────────────────────────

    /// Standard matrix product. Rank-2 × rank-2, or batched with rank-3
    /// inputs over the leading dimension (the right operand may stay rank-2
    /// and is then shared across the batch).
    pub fn matmul(&self, a: &Tensor<R>, b: &Tensor<R>) -> Result<Tensor<R>, NumError> {
        let (ashape, bshape) = (a.shape(), b.shape());
        let (batch, m, k, n, b_batched, out_shape) = match (ashape.len(), bshape.len()) {
            (2, 2) => {
                if ashape[1] != bshape[0] {
                    return Err(NumError::Shape {
                        op: "matmul",
                        detail: format!("{ashape:?} x {bshape:?}"),
                    });
                }
                (1, ashape[0], ashape[1], bshape[1], false, vec![ashape[0], bshape[1]])
            }
            (3, 3) => {
                if ashape[0] != bshape[0] || ashape[2] != bshape[1] {
                    return Err(NumError::Shape {
                        op: "matmul",
                        detail: format!("{ashape:?} x {bshape:?}"),
                    });
                }
                (
                    ashape[0],
                    ashape[1],
                    ashape[2],
                    bshape[2],
                    true,
                    vec![ashape[0], ashape[1], bshape[2]],
                )
            }
            (3, 2) => {
                if ashape[2] != bshape[0] {
                    return Err(NumError::Shape {
                        op: "matmul",
                        detail: format!("{ashape:?} x {bshape:?}"),
                    });
                }
                (
                    ashape[0],
                    ashape[1],
                    ashape[2],
                    bshape[1],
                    false,
                    vec![ashape[0], ashape[1], bshape[1]],
                )
            }
            _ => {
                return Err(NumError::Shape {
                    op: "matmul",
                    detail: format!("unsupported ranks {ashape:?} x {bshape:?}"),
                })
            }
        };
        let mut data = vec![R::ZERO; batch * m * n];
        {
            let (da, db) = (a.data(), b.data());
            for bi in 0..batch {
                let bmat = if b_batched {
                    &db[bi * k * n..(bi + 1) * k * n]
                } else {
                    &db[..]
                };
                for i in 0..m {
                    let row = &da[bi * m * k + i * k..bi * m * k + (i + 1) * k];
                    let out_row = &mut data[bi * m * n + i * n..bi * m * n + (i + 1) * n];
                    kernels::row_times_matrix(row, bmat, k, n, out_row);
                }
            }
        }
        let out = Tensor::from_vec(out_shape, data);
        self.push(
            Node::MatMul {
                a: a.clone(),
                b: b.clone(),
                out: out.clone(),
                batch,
                m,
                k,
                n,
                b_batched,
            },
            &out,
            a.requires_grad() || b.requires_grad(),
        );
        Ok(out)
    }

    // ── normalization, rotation, attention ──────────────────────────────

    /// RMS pre-normalization over the trailing axis with a learnable gain.
    pub fn rmsnorm(&self, x: &Tensor<R>, gain: &Tensor<R>, eps: R) -> Result<Tensor<R>, NumError> {
        let (rows, cols) = rows_cols(&x.shape());
        if gain.numel() != cols {
            return Err(NumError::Shape {
                op: "rmsnorm",
                detail: format!("gain of {} for rows of {cols}", gain.numel()),
            });
        }
        let mut data = vec![R::ZERO; rows * cols];
        let mut inv_rms = vec![R::ZERO; rows];
        {
            let (dx, dg) = (x.data(), gain.data());
            for r in 0..rows {
                inv_rms[r] = kernels::rmsnorm_row(
                    &dx[r * cols..(r + 1) * cols],
                    &dg,
                    eps,
                    &mut data[r * cols..(r + 1) * cols],
                );
            }
        }
        let out = Tensor::from_vec(x.shape(), data);
        self.push(
            Node::RmsNorm {
                x: x.clone(),
                gain: gain.clone(),
                out: out.clone(),
                inv_rms,
            },
            &out,
            x.requires_grad() || gain.requires_grad(),
        );
        Ok(out)
    }

    /// Rotary position encoding over consecutive column pairs, one position
    /// per row.
    pub fn rope(
        &self,
        x: &Tensor<R>,
        positions: &[usize],
        base: f64,
    ) -> Result<Tensor<R>, NumError> {
        let (rows, cols) = rows_cols(&x.shape());
        if cols % 2 != 0 {
            return Err(NumError::OddRotaryDim(cols));
        }
        if positions.len() != rows {
            return Err(NumError::Shape {
                op: "rope",
                detail: format!("{} positions for {rows} rows", positions.len()),
            });
        }
        let mut data = vec![R::ZERO; rows * cols];
        {
            let dx = x.data();
            for r in 0..rows {
                kernels::rope_row(
                    &dx[r * cols..(r + 1) * cols],
                    positions[r],
                    base,
                    &mut data[r * cols..(r + 1) * cols],
                );
            }
        }
        let out = Tensor::from_vec(x.shape(), data);
        self.push(
            Node::Rope {
                x: x.clone(),
                out: out.clone(),
                positions: positions.to_vec(),
                base,
            },
            &out,
            x.requires_grad(),
        );
        Ok(out)
    }

    /// Row softmax with max-subtraction. Entries at or below the −∞ sentinel
    /// ([`MASK_SENTINEL`]) receive exactly zero probability; a row that is
    /// entirely masked is an error.
    pub fn softmax_rows(&self, x: &Tensor<R>) -> Result<Tensor<R>, NumError> {
        let shape = x.shape();
        if shape.len() < 2 {
            return Err(NumError::Shape {
                op: "softmax_rows",
                detail: format!("rank {} < 2", shape.len()),
            });
        }
        let cols = *shape.last().unwrap();
        let rows = x.numel() / cols;
        let sentinel = R::from_f64(MASK_SENTINEL);
        let mut data = vec![R::ZERO; rows * cols];
        {
            let dx = x.data();
            for r in 0..rows {
                let row = &dx[r * cols..(r + 1) * cols];
                let mut max = R::from_f64(f64::NEG_INFINITY);
                for &v in row {
                    if v > sentinel {
                        max = max.maximum(v);
                    }
                }
                if !max.is_finite() {
                    return Err(NumError::DegenerateRow { row: r });
                }
                let out_row = &mut data[r * cols..(r + 1) * cols];
                let mut denom = R::ZERO;
                for (o, &v) in out_row.iter_mut().zip(row) {
                    *o = if v > sentinel { (v - max).exp() } else { R::ZERO };
                    denom += *o;
                }
                for o in out_row.iter_mut() {
                    *o = *o / denom;
                }
            }
        }
        let out = Tensor::from_vec(shape, data);
        self.push(
            Node::SoftmaxRows {
                x: x.clone(),
                out: out.clone(),
            },
            &out,
            x.requires_grad(),
        );
        Ok(out)
    }

    /// Fused masked self-attention for one head: scores restricted to the
    /// lower triangle (row `i` attends to positions `0..=i`), softmax, and
    /// the weighted value sum. Stored attention weights above the diagonal
    /// are exactly zero.
    pub fn causal_attention(
        &self,
        q: &Tensor<R>,
        k: &Tensor<R>,
        v: &Tensor<R>,
    ) -> Result<Tensor<R>, NumError> {
        let (qs, ks, vs) = (q.shape(), k.shape(), v.shape());
        if qs.len() != 2 || ks != qs || vs.len() != 2 || vs[0] != qs[0] {
            return Err(NumError::Shape {
                op: "causal_attention",
                detail: format!("q {qs:?}, k {ks:?}, v {vs:?}"),
            });
        }
        let (len, d_k) = (qs[0], qs[1]);
        let d_v = vs[1];
        let inv_sqrt_dk = R::ONE / R::from_usize(d_k).sqrt();
        let mut probs = vec![R::ZERO; len * len];
        let mut data = vec![R::ZERO; len * d_v];
        {
            let (dq, dk, dv) = (q.data(), k.data(), v.data());
            for i in 0..len {
                kernels::causal_attn_row(
                    &dq[i * d_k..(i + 1) * d_k],
                    &dk,
                    &dv,
                    i + 1,
                    d_k,
                    d_v,
                    inv_sqrt_dk,
                    &mut probs[i * len..(i + 1) * len],
                    &mut data[i * d_v..(i + 1) * d_v],
                );
            }
        }
        let out = Tensor::from_vec(vec![len, d_v], data);
        self.push(
            Node::CausalAttention {
                q: q.clone(),
                k: k.clone(),
                v: v.clone(),
                out: out.clone(),
                probs,
                inv_sqrt_dk,
            },
            &out,
            q.requires_grad() || k.requires_grad() || v.requires_grad(),
        );
        Ok(out)
    }

    // ── gathers and layout ──────────────────────────────────────────────

    /// Gathers rows of `table` by id.
    pub fn embedding(&self, table: &Tensor<R>, ids: &[u32]) -> Result<Tensor<R>, NumError> {
        let shape = table.shape();
        let (rows, cols) = (shape[0], shape[1]);
        let mut data = Vec::with_capacity(ids.len() * cols);
        {
            let dt = table.data();
            for (pos, &id) in ids.iter().enumerate() {
                if id as usize >= rows {
                    return Err(NumError::IdOutOfRange { id, rows, pos });
                }
                data.extend_from_slice(&dt[id as usize * cols..(id as usize + 1) * cols]);
            }
        }
        let out = Tensor::from_vec(vec![ids.len(), cols], data);
        self.push(
            Node::Embedding {
                table: table.clone(),
                ids: ids.to_vec(),
                out: out.clone(),
            },
            &out,
            table.requires_grad(),
        );
        Ok(out)
    }

    /// Stacks parts on top of each other. Rank-1 parts count as single rows.
    pub fn concat_rows(&self, parts: &[Tensor<R>]) -> Result<Tensor<R>, NumError> {
        assert!(!parts.is_empty());
        let cols = rows_cols(&parts[0].shape()).1;
        let mut data = Vec::new();
        let mut total_rows = 0;
        for p in parts {
            let (r, c) = rows_cols(&p.shape());
            if c != cols {
                return Err(NumError::Shape {
                    op: "concat_rows",
                    detail: format!("row widths {cols} vs {c}"),
                });
            }
            total_rows += r;
            data.extend_from_slice(&p.data());
        }
        let out = Tensor::from_vec(vec![total_rows, cols], data);
        self.push(
            Node::ConcatRows {
                parts: parts.to_vec(),
                out: out.clone(),
            },
            &out,
            parts.iter().any(|p| p.requires_grad()),
        );
        Ok(out)
    }

    /// Takes a contiguous block of columns.
    pub fn slice_cols(
        &self,
        x: &Tensor<R>,
        start: usize,
        len: usize,
    ) -> Result<Tensor<R>, NumError> {
        let (rows, cols) = rows_cols(&x.shape());
        if start + len > cols {
            return Err(NumError::Shape {
                op: "slice_cols",
                detail: format!("slice {start}..{} of {cols} columns", start + len),
            });
        }
        let mut data = Vec::with_capacity(rows * len);
        {
            let dx = x.data();
            for r in 0..rows {
                data.extend_from_slice(&dx[r * cols + start..r * cols + start + len]);
            }
        }
        let out = Tensor::from_vec(vec![rows, len], data);
        self.push(
            Node::SliceCols {
                x: x.clone(),
                start,
                len,
                out: out.clone(),
            },
            &out,
            x.requires_grad(),
        );
        Ok(out)
    }

    /// Concatenates parts side by side along the column axis.
    pub fn concat_cols(&self, parts: &[Tensor<R>]) -> Result<Tensor<R>, NumError> {
        assert!(!parts.is_empty());
        let rows = rows_cols(&parts[0].shape()).0;
        let widths: Vec<usize> = parts.iter().map(|p| rows_cols(&p.shape()).1).collect();
        for p in parts {
            if rows_cols(&p.shape()).0 != rows {
                return Err(NumError::Shape {
                    op: "concat_cols",
                    detail: "row count mismatch".into(),
                });
            }
        }
        let total: usize = widths.iter().sum();
        let mut data = vec![R::ZERO; rows * total];
        {
            let mut offset = 0;
            for (p, &w) in parts.iter().zip(&widths) {
                let dp = p.data();
                for r in 0..rows {
                    data[r * total + offset..r * total + offset + w]
                        .copy_from_slice(&dp[r * w..(r + 1) * w]);
                }
                offset += w;
            }
        }
        let out = Tensor::from_vec(vec![rows, total], data);
        self.push(
            Node::ConcatCols {
                parts: parts.to_vec(),
                out: out.clone(),
            },
            &out,
            parts.iter().any(|p| p.requires_grad()),
        );
        Ok(out)
    }

    // ── loss and regularization ─────────────────────────────────────────

    /// Mean of `-log softmax(logits)[target]` over the positions whose
    /// target differs from `ignore_id`. Ignored positions contribute nothing
    /// to value or gradient.
    pub fn cross_entropy(
        &self,
        logits: &Tensor<R>,
        targets: &[u32],
        ignore_id: u32,
    ) -> Result<CrossEntropyOut<R>, NumError> {
        let shape = logits.shape();
        if shape.len() != 2 || shape[0] != targets.len() {
            return Err(NumError::Shape {
                op: "cross_entropy",
                detail: format!("logits {shape:?} for {} targets", targets.len()),
            });
        }
        let (rows, vocab) = (shape[0], shape[1]);
        let mut probs = vec![R::ZERO; rows * vocab];
        let mut total = R::ZERO;
        let mut counted = 0usize;
        {
            let dl = logits.data();
            for (r, &t) in targets.iter().enumerate() {
                if t == ignore_id {
                    continue;
                }
                if t as usize >= vocab {
                    return Err(NumError::TargetOutOfRange {
                        id: t,
                        vocab,
                        pos: r,
                    });
                }
                let row = &dl[r * vocab..(r + 1) * vocab];
                kernels::softmax_slice(row, &mut probs[r * vocab..(r + 1) * vocab]);
                let p = probs[r * vocab + t as usize];
                total += -(p.ln());
                counted += 1;
            }
        }
        let loss_val = if counted == 0 {
            R::ZERO
        } else {
            total / R::from_usize(counted)
        };
        let out = Tensor::scalar(loss_val);
        self.push(
            Node::CrossEntropy {
                logits: logits.clone(),
                targets: targets.to_vec(),
                ignore_id,
                probs,
                counted,
                out: out.clone(),
            },
            &out,
            logits.requires_grad(),
        );
        Ok(CrossEntropyOut { loss: out, counted })
    }

    /// Inverted-scaling dropout with a caller-provided keep mask. Kept
    /// entries are scaled by `1 / keep_prob`; dropped entries become zero.
    pub fn dropout_masked(
        &self,
        x: &Tensor<R>,
        keep: Vec<bool>,
        keep_prob: R,
    ) -> Result<Tensor<R>, NumError> {
        if keep.len() != x.numel() {
            return Err(NumError::Shape {
                op: "dropout",
                detail: format!("mask of {} for {} elements", keep.len(), x.numel()),
            });
        }
        let scale = R::ONE / keep_prob;
        let data = {
            let dx = x.data();
            dx.iter()
                .zip(&keep)
                .map(|(&v, &k)| if k { v * scale } else { R::ZERO })
                .collect()
        };
        let out = Tensor::from_vec(x.shape(), data);
        self.push(
            Node::Dropout {
                x: x.clone(),
                keep,
                scale,
                out: out.clone(),
            },
            &out,
            x.requires_grad(),
        );
        Ok(out)
    }

    // ── backward ────────────────────────────────────────────────────────

    /// Backpropagates from a scalar loss through every recorded op, summing
    /// gradients into each tensor that requires them. Consumes the graph: a
    /// second call is a state error.
    pub fn backward(&self, loss: &Tensor<R>) -> Result<(), NumError> {
        if self.consumed.get() {
            return Err(NumError::GraphConsumed);
        }
        self.consumed.set(true);
        if loss.numel() != 1 {
            return Err(NumError::NonScalarLoss(loss.shape()));
        }
        loss.accumulate_grad(&[R::ONE]);

        let nodes = self.nodes.borrow();
        for node in nodes.iter().rev() {
            backward_node(node);
        }
        Ok(())
    }
}

impl<R: Real> Default for Tape<R> {
    fn default() -> Self {
        Self::new()
    }
}

fn rows_cols(shape: &[usize]) -> (usize, usize) {
    match shape.len() {
        1 => (1, shape[0]),
        _ => (
            shape[..shape.len() - 1].iter().product(),
            *shape.last().unwrap(),
        ),
    }
}

fn grad_into<R: Real>(t: &Tensor<R>, delta: &[R]) {
    if t.requires_grad() {
        t.accumulate_grad(delta);
    }
}

fn backward_node<R: Real>(node: &Node<R>) {
    match node {
        Node::Add { a, b, out } => {
            let Some(g) = out.grad() else { return };
            grad_into(a, &g);
            grad_into(b, &g);
        }
        Node::AddRowVec { a, v, out } => {
            let Some(g) = out.grad() else { return };
            grad_into(a, &g);
            if v.requires_grad() {
                let cols = v.numel();
                let mut dv = vec![R::ZERO; cols];
                for (i, &gv) in g.iter().enumerate() {
                    dv[i % cols] += gv;
                }
                v.accumulate_grad(&dv);
            }
        }
        Node::Mul { a, b, out } => {
            let Some(g) = out.grad() else { return };
            let (da, db) = {
                let (xa, xb) = (a.data(), b.data());
                let da: Vec<R> = g.iter().zip(xb.iter()).map(|(&g, &b)| g * b).collect();
                let db: Vec<R> = g.iter().zip(xa.iter()).map(|(&g, &a)| g * a).collect();
                (da, db)
            };
            grad_into(a, &da);
            grad_into(b, &db);
        }
        Node::Scale { a, c, out } => {
            let Some(g) = out.grad() else { return };
            let da: Vec<R> = g.iter().map(|&g| g * *c).collect();
            grad_into(a, &da);
        }
        Node::MatMul {
            a,
            b,
            out,
            batch,
            m,
            k,
            n,
            b_batched,
        } => {
            let Some(g) = out.grad() else { return };
            let (batch, m, k, n) = (*batch, *m, *k, *n);
            let (da, db) = {
                let (xa, xb) = (a.data(), b.data());
                let mut da = vec![R::ZERO; batch * m * k];
                let mut db = vec![R::ZERO; xb.len()];
                for bi in 0..batch {
                    let bmat = if *b_batched {
                        &xb[bi * k * n..(bi + 1) * k * n]
                    } else {
                        &xb[..]
                    };
                    let bgrad_off = if *b_batched { bi * k * n } else { 0 };
                    for i in 0..m {
                        let grow = &g[bi * m * n + i * n..bi * m * n + (i + 1) * n];
                        let arow = &xa[bi * m * k + i * k..bi * m * k + (i + 1) * k];
                        let darow = &mut da[bi * m * k + i * k..bi * m * k + (i + 1) * k];
                        for p in 0..k {
                            // da[i,p] = sum_j g[i,j] * b[p,j]
                            let brow = &bmat[p * n..(p + 1) * n];
                            let mut acc = R::ZERO;
                            for (&gv, &bv) in grow.iter().zip(brow) {
                                acc += gv * bv;
                            }
                            darow[p] += acc;
                            // db[p,j] += a[i,p] * g[i,j]
                            let ap = arow[p];
                            let dbrow = &mut db[bgrad_off + p * n..bgrad_off + (p + 1) * n];
                            for (dbv, &gv) in dbrow.iter_mut().zip(grow) {
                                *dbv += ap * gv;
                            }
                        }
                    }
                }
                (da, db)
            };
            grad_into(a, &da);
            grad_into(b, &db);
        }
        Node::Silu { a, out } => {
            let Some(g) = out.grad() else { return };
            let da: Vec<R> = {
                let xa = a.data();
                g.iter()
                    .zip(xa.iter())
                    .map(|(&g, &x)| {
                        let s = kernels::sigmoid(x);
                        g * (s * (R::ONE + x * (R::ONE - s)))
                    })
                    .collect()
            };
            grad_into(a, &da);
        }
        Node::RmsNorm {
            x,
            gain,
            out,
            inv_rms,
        } => {
            let Some(g) = out.grad() else { return };
            let (rows, cols) = rows_cols(&x.shape());
            let (dx, dgain) = {
                let (xd, gd) = (x.data(), gain.data());
                let mut dx = vec![R::ZERO; rows * cols];
                let mut dgain = vec![R::ZERO; cols];
                let inv_n = R::ONE / R::from_usize(cols);
                for r in 0..rows {
                    let ri = inv_rms[r];
                    let xr = &xd[r * cols..(r + 1) * cols];
                    let gr = &g[r * cols..(r + 1) * cols];
                    let mut dot = R::ZERO;
                    for c in 0..cols {
                        dot += gr[c] * gd[c] * xr[c];
                        dgain[c] += gr[c] * xr[c] * ri;
                    }
                    let coeff = ri * ri * ri * inv_n * dot;
                    let dxr = &mut dx[r * cols..(r + 1) * cols];
                    for c in 0..cols {
                        dxr[c] += ri * gr[c] * gd[c] - coeff * xr[c];
                    }
                }
                (dx, dgain)
            };
            grad_into(x, &dx);
            grad_into(gain, &dgain);
        }
        Node::Rope {
            x,
            out,
            positions,
            base,
        } => {
            let Some(g) = out.grad() else { return };
            let (rows, cols) = rows_cols(&x.shape());
            let mut dx = vec![R::ZERO; rows * cols];
            for r in 0..rows {
                for pair in 0..cols / 2 {
                    let angle = positions[r] as f64 * kernels::rope_freq(pair, cols, *base);
                    let (sin, cos) = (R::from_f64(angle.sin()), R::from_f64(angle.cos()));
                    let g0 = g[r * cols + 2 * pair];
                    let g1 = g[r * cols + 2 * pair + 1];
                    // Inverse rotation: transpose of the forward 2x2 block.
                    dx[r * cols + 2 * pair] = g0 * cos + g1 * sin;
                    dx[r * cols + 2 * pair + 1] = -g0 * sin + g1 * cos;
                }
            }
            grad_into(x, &dx);
        }
        Node::SoftmaxRows { x, out } => {
            let Some(g) = out.grad() else { return };
            let cols = *out.shape().last().unwrap();
            let rows = out.numel() / cols;
            let dx = {
                let y = out.data();
                let mut dx = vec![R::ZERO; rows * cols];
                for r in 0..rows {
                    let yr = &y[r * cols..(r + 1) * cols];
                    let gr = &g[r * cols..(r + 1) * cols];
                    let mut dot = R::ZERO;
                    for (&gv, &yv) in gr.iter().zip(yr) {
                        dot += gv * yv;
                    }
                    let dxr = &mut dx[r * cols..(r + 1) * cols];
                    for c in 0..cols {
                        dxr[c] = (gr[c] - dot) * yr[c];
                    }
                }
                dx
            };
            grad_into(x, &dx);
        }
        Node::CausalAttention {
            q,
            k,
            v,
            out,
            probs,
            inv_sqrt_dk,
        } => {
            let Some(g) = out.grad() else { return };
            let len = q.shape()[0];
            let d_k = q.shape()[1];
            let d_v = v.shape()[1];
            let (dq, dk, dv) = {
                let (qd, kd, vd) = (q.data(), k.data(), v.data());
                let mut dq = vec![R::ZERO; len * d_k];
                let mut dk = vec![R::ZERO; len * d_k];
                let mut dv = vec![R::ZERO; len * d_v];
                let mut dots = vec![R::ZERO; len];
                for i in 0..len {
                    let gi = &g[i * d_v..(i + 1) * d_v];
                    let pi = &probs[i * len..(i + 1) * len];
                    // dot(dout_i, v_j) and dv accumulation
                    let mut sum_pd = R::ZERO;
                    for j in 0..=i {
                        let vj = &vd[j * d_v..(j + 1) * d_v];
                        let mut dot = R::ZERO;
                        for (&gv, &vv) in gi.iter().zip(vj) {
                            dot += gv * vv;
                        }
                        dots[j] = dot;
                        sum_pd += pi[j] * dot;
                        let dvj = &mut dv[j * d_v..(j + 1) * d_v];
                        let p = pi[j];
                        for (dvv, &gv) in dvj.iter_mut().zip(gi) {
                            *dvv += p * gv;
                        }
                    }
                    let qi = &qd[i * d_k..(i + 1) * d_k];
                    let dqi_start = i * d_k;
                    for j in 0..=i {
                        let ds = pi[j] * (dots[j] - sum_pd) * *inv_sqrt_dk;
                        let kj = &kd[j * d_k..(j + 1) * d_k];
                        for c in 0..d_k {
                            dq[dqi_start + c] += ds * kj[c];
                            dk[j * d_k + c] += ds * qi[c];
                        }
                    }
                }
                (dq, dk, dv)
            };
            grad_into(q, &dq);
            grad_into(k, &dk);
            grad_into(v, &dv);
        }
        Node::Embedding { table, ids, out } => {
            let Some(g) = out.grad() else { return };
            if !table.requires_grad() {
                return;
            }
            let cols = table.shape()[1];
            let mut dt = vec![R::ZERO; table.numel()];
            for (pos, &id) in ids.iter().enumerate() {
                let dst = &mut dt[id as usize * cols..(id as usize + 1) * cols];
                let src = &g[pos * cols..(pos + 1) * cols];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += s;
                }
            }
            table.accumulate_grad(&dt);
        }
        Node::ConcatRows { parts, out } => {
            let Some(g) = out.grad() else { return };
            let mut offset = 0;
            for p in parts {
                let n = p.numel();
                grad_into(p, &g[offset..offset + n]);
                offset += n;
            }
        }
        Node::SliceCols { x, start, len, out } => {
            let Some(g) = out.grad() else { return };
            let (rows, cols) = rows_cols(&x.shape());
            let mut dx = vec![R::ZERO; rows * cols];
            for r in 0..rows {
                for c in 0..*len {
                    dx[r * cols + start + c] = g[r * len + c];
                }
            }
            grad_into(x, &dx);
        }
        Node::ConcatCols { parts, out } => {
            let Some(g) = out.grad() else { return };
            let rows = rows_cols(&parts[0].shape()).0;
            let total = rows_cols(&out.shape()).1;
            let mut offset = 0;
            for p in parts {
                let w = rows_cols(&p.shape()).1;
                let mut dp = vec![R::ZERO; rows * w];
                for r in 0..rows {
                    dp[r * w..(r + 1) * w]
                        .copy_from_slice(&g[r * total + offset..r * total + offset + w]);
                }
                grad_into(p, &dp);
                offset += w;
            }
        }
        Node::CrossEntropy {
            logits,
            targets,
            ignore_id,
            probs,
            counted,
            out,
        } => {
            let Some(g) = out.grad() else { return };
            if !logits.requires_grad() || *counted == 0 {
                return;
            }
            let vocab = logits.shape()[1];
            let scale = g[0] / R::from_usize(*counted);
            let mut dl = vec![R::ZERO; logits.numel()];
            for (r, &t) in targets.iter().enumerate() {
                if t == *ignore_id {
                    continue;
                }
                let pr = &probs[r * vocab..(r + 1) * vocab];
                let dr = &mut dl[r * vocab..(r + 1) * vocab];
                for (c, (d, &p)) in dr.iter_mut().zip(pr).enumerate() {
                    let indicator = if c == t as usize { R::ONE } else { R::ZERO };
                    *d = (p - indicator) * scale;
                }
            }
            logits.accumulate_grad(&dl);
        }
        Node::Dropout {
            x,
            keep,
            scale,
            out,
        } => {
            let Some(g) = out.grad() else { return };
            let dx: Vec<R> = g
                .iter()
                .zip(keep)
                .map(|(&g, &k)| if k { g * *scale } else { R::ZERO })
                .collect();
            grad_into(x, &dx);
        }
        Node::SumAll { x, out } => {
            let Some(g) = out.grad() else { return };
            let dx = vec![g[0]; x.numel()];
            grad_into(x, &dx);
        }
    }
}
