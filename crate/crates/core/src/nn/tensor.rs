use super::{NnError, Result};

/// Dense row-major array with an explicit shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(NnError::Shape(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(NnError::Shape(format!("non-finite entry {bad}")));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

/// Stride-1, unpadded cross-correlation.
///
/// `input` is `c_in × h × w`, `kernel` is `c_out × c_in × kh × kw`; the result
/// is `c_out × (h − kh + 1) × (w − kw + 1)`.
pub fn conv2d_forward(input: &Tensor, kernel: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let &[c_in, h, w] = input.shape() else {
        return Err(NnError::Shape(format!("conv input must be 3-D, got {:?}", input.shape())));
    };
    let &[c_out, k_in, kh, kw] = kernel.shape() else {
        return Err(NnError::Shape(format!("kernel must be 4-D, got {:?}", kernel.shape())));
    };
    if k_in != c_in {
        return Err(NnError::Shape(format!("kernel expects {k_in} input channels, got {c_in}")));
    }
    if bias.len() != c_out {
        return Err(NnError::Shape(format!("bias has {} entries for {c_out} outputs", bias.len())));
    }
    if kh > h || kw > w {
        return Err(NnError::KernelTooLarge { kh, kw, h, w });
    }
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let x = input.data();
    let k = kernel.data();
    let mut out = vec![0.0; c_out * oh * ow];
    for o in 0..c_out {
        let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
        plane.fill(bias[o]);
        for i in 0..c_in {
            for dy in 0..kh {
                for dx in 0..kw {
                    let wgt = k[((o * c_in + i) * kh + dy) * kw + dx];
                    for y in 0..oh {
                        let src = &x[(i * h + y + dy) * w + dx..][..ow];
                        for (dst, s) in plane[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                            *dst += wgt * s;
                        }
                    }
                }
            }
        }
    }
    Tensor::new(vec![c_out, oh, ow], out)
}

/// Affine map `W x + b` with `W` shaped `outputs × inputs`.
pub fn dense_forward(input: &[f64], weights: &Tensor, bias: &[f64]) -> Result<Vec<f64>> {
    let &[rows, cols] = weights.shape() else {
        return Err(NnError::Shape(format!("weights must be 2-D, got {:?}", weights.shape())));
    };
    if cols != input.len() || rows != bias.len() {
        return Err(NnError::Shape(format!(
            "weights {rows}x{cols}, input {}, bias {}",
            input.len(),
            bias.len()
        )));
    }
    Ok(weights
        .data()
        .chunks_exact(cols)
        .zip(bias)
        .map(|(row, b)| b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>())
        .collect())
}
