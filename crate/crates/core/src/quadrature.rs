//! Globally adaptive Gauss-Kronrod (7/15) quadrature for real and complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

// Kronrod nodes on [0, 1] (symmetric), with Kronrod and embedded Gauss weights.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod = kronrod + sum * WK[j];
        // Gauss nodes are the odd-indexed Kronrod nodes.
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).magnitude())
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 0.0, rel: 1e-10, max_segments: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// `∫_a^b f`, bisecting the worst segment until the error estimate meets `tol`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, tol: Tolerance) -> Estimate<T> {
    if a == b {
        return Estimate { value: T::zero(), error: 0.0 };
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    while total_err > tol.abs.max(tol.rel * total.magnitude()) && heap.len() < tol.max_segments {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total = total - worst.value + lv + rv;
        total_err = total_err - worst.error + le + re;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
    }
    // Re-sum to shed the drift of incremental updates.
    let value = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
    let error = heap.iter().map(|s| s.error).sum();
    Estimate { value, error }
}

/// Integrates over `[a, b]`, then keeps appending blocks of `block` width on
/// each side (never crossing `floor`) until a block adds less than
/// `tail_rel` of the running total.
pub fn integrate_extending<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    floor: f64,
    block: f64,
    tail_rel: f64,
    tol: Tolerance,
) -> Estimate<T> {
    let a = a.max(floor);
    let core = integrate(&f, a, b, tol);
    let mut value = core.value;
    let mut error = core.error;

    let mut hi = b;
    for _ in 0..64 {
        let piece = integrate(&f, hi, hi + block, tol);
        value = value + piece.value;
        error += piece.error;
        hi += block;
        if piece.value.magnitude() <= tail_rel * value.magnitude() {
            break;
        }
    }
    let mut lo = a;
    for _ in 0..64 {
        if lo <= floor {
            break;
        }
        let next = (lo - block).max(floor);
        let piece = integrate(&f, next, lo, tol);
        value = value + piece.value;
        error += piece.error;
        lo = next;
        if piece.value.magnitude() <= tail_rel * value.magnitude() {
            break;
        }
    }
    Estimate { value, error }
}
