//! Dense `f64` tensors of rank at most two and the named maps that hold
//! transform parameters and state.
//!
//! NaN is the missing-value marker everywhere in this crate.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Rank-0, rank-1 or rank-2 layout. Matrices are row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Scalar,
    Vector(usize),
    Matrix(usize, usize),
}

impl Shape {
    pub fn len(self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector(n) => n,
            Shape::Matrix(r, c) => r * c,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    /// Shape of `rows` stacked copies of a tensor with this shape, if the
    /// result still has rank at most two.
    pub fn stacked(self, rows: usize) -> Option<Shape> {
        match self {
            Shape::Scalar => Some(Shape::Vector(rows)),
            Shape::Vector(n) => Some(Shape::Matrix(rows, n)),
            Shape::Matrix(..) => None,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Scalar => write!(f, "scalar"),
            Shape::Vector(n) => write!(f, "vector[{n}]"),
            Shape::Matrix(r, c) => write!(f, "matrix[{r}x{c}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Shape,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if shape.len() != data.len() {
            return Err(Error::Shape {
                expected: format!("{} elements for {shape}", shape.len()),
                actual: format!("{} elements", data.len()),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: Shape::Scalar,
            data: vec![value],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor {
            shape: Shape::Vector(data.len()),
            data,
        }
    }

    pub fn full(shape: Shape, value: f64) -> Self {
        Tensor {
            shape,
            data: vec![value; shape.len()],
        }
    }

    pub fn nan(shape: Shape) -> Self {
        Self::full(shape, f64::NAN)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// The single element of a scalar (or any one-element) tensor.
    pub fn as_scalar(&self) -> Result<f64> {
        match self.data.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::shape("scalar", self.shape)),
        }
    }

    pub fn expect_shape(&self, shape: Shape) -> Result<()> {
        if self.shape == shape {
            Ok(())
        } else {
            Err(Error::shape(shape, self.shape))
        }
    }

    /// Bitwise equality; treats NaN as equal to NaN with the same payload.
    pub fn bit_eq(&self, other: &Tensor) -> bool {
        self.shape == other.shape
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// A state or parameter entry: a tensor, or a nested namespace.
#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Tensor(Tensor),
    Map(TensorMap),
}

/// Ordered map from names to tensors and nested maps.
///
/// Nested maps model namespacing: a tensor `buffer` inside the sub-map
/// `inner` is addressed as `inner/buffer`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorMap {
    entries: BTreeMap<String, Entry>,
}

pub type Params = TensorMap;
pub type State = TensorMap;

impl TensorMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, tensor: Tensor) -> Self {
        self.insert(name, tensor);
        self
    }

    pub fn with_map(mut self, name: impl Into<String>, map: TensorMap) -> Self {
        self.insert_map(name, map);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) {
        self.entries.insert(name.into(), Entry::Tensor(tensor));
    }

    pub fn insert_map(&mut self, name: impl Into<String>, map: TensorMap) {
        self.entries.insert(name.into(), Entry::Map(map));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Looks up a tensor by slash-separated path.
    pub fn get(&self, path: &str) -> Option<&Tensor> {
        match path.split_once('/') {
            None => match self.entries.get(path)? {
                Entry::Tensor(t) => Some(t),
                Entry::Map(_) => None,
            },
            Some((head, rest)) => match self.entries.get(head)? {
                Entry::Map(m) => m.get(rest),
                Entry::Tensor(_) => None,
            },
        }
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor> {
        self.get(name)
            .ok_or_else(|| Error::Consistency(format!("missing tensor entry '{name}'")))
    }

    pub fn tensor_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        match self.entries.get_mut(name) {
            Some(Entry::Tensor(t)) => Ok(t),
            _ => Err(Error::Consistency(format!("missing tensor entry '{name}'"))),
        }
    }

    pub fn map(&self, name: &str) -> Result<&TensorMap> {
        match self.entries.get(name) {
            Some(Entry::Map(m)) => Ok(m),
            _ => Err(Error::Consistency(format!("missing namespace '{name}'"))),
        }
    }

    /// Detaches a namespace, returning its key so it can be reinserted
    /// without reallocating.
    pub fn take_map(&mut self, name: &str) -> Result<(String, TensorMap)> {
        match self.entries.remove_entry(name) {
            Some((key, Entry::Map(m))) => Ok((key, m)),
            Some((key, other)) => {
                self.entries.insert(key, other);
                Err(Error::Consistency(format!("'{name}' is not a namespace")))
            }
            None => Err(Error::Consistency(format!("missing namespace '{name}'"))),
        }
    }

    /// Flattened `(path, tensor)` pairs in key order.
    pub fn flatten(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        self.flatten_into("", &mut out);
        out
    }

    fn flatten_into<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>) {
        for (key, entry) in &self.entries {
            let path = if prefix.is_empty() {
                key.clone()
            } else {
                format!("{prefix}/{key}")
            };
            match entry {
                Entry::Tensor(t) => out.push((path, t)),
                Entry::Map(m) => m.flatten_into(&path, out),
            }
        }
    }

    /// Flattened tensor paths in key order.
    pub fn keys(&self) -> Vec<String> {
        self.flatten().into_iter().map(|(k, _)| k).collect()
    }

    /// Bitwise equality of two maps (NaN-aware).
    pub fn bit_eq(&self, other: &TensorMap) -> bool {
        let a = self.flatten();
        let b = other.flatten();
        a.len() == b.len()
            && a.iter()
                .zip(&b)
                .all(|((ka, ta), (kb, tb))| ka == kb && ta.bit_eq(tb))
    }
}
