#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qudit_teleport::fock::{make_state, Occupation, PureState, Register};
use qudit_teleport::optics::{random_unitary, ModeUnitary};

/// All occupations of `photons` photons over `modes` modes.
pub fn occupations(modes: usize, photons: usize) -> Vec<Occupation> {
    fn rec(modes: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Occupation>) {
        if prefix.len() + 1 == modes {
            prefix.push(left as u8);
            out.push(Occupation::from_counts(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k as u8);
            rec(modes, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(modes, photons, &mut Vec::new(), &mut out);
    out
}

pub fn random_state(
    rng: &mut ChaCha8Rng,
    reg: Register,
    photons: usize,
    terms: usize,
) -> PureState {
    let all = occupations(reg.modes(), photons);
    let picked: Vec<(Occupation, Complex64)> = (0..terms)
        .map(|_| {
            let occ = all[rng.random_range(0..all.len())].clone();
            (
                occ,
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    make_state(reg, picked).unwrap().normalized().unwrap()
}

/// Haar unitary on a random nonempty subset of the paths, in random order.
pub fn random_acted(rng: &mut ChaCha8Rng, paths: usize) -> ModeUnitary {
    let k = rng.random_range(1..=paths);
    let mut acted: Vec<usize> = (0..paths).collect();
    for i in (1..acted.len()).rev() {
        acted.swap(i, rng.random_range(0..=i));
    }
    acted.truncate(k);
    ModeUnitary::new(random_unitary(rng, k), acted).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All permutations of `0..n` with their signs, by repeated insertion.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut perms = vec![(Vec::new(), 1.0)];
    for k in 0..n {
        let mut next = Vec::new();
        for (p, s) in &perms {
            // inserting k at position i moves it past k - i larger-index slots
            for i in 0..=k {
                let mut q: Vec<usize> = p.clone();
                q.insert(i, k);
                let sign = if (k - i) % 2 == 0 { *s } else { -*s };
                next.push((q, sign));
            }
        }
        perms = next;
    }
    perms
}

/// Rank of `(1/n!) Σ_π sgn(π) P_π` on `n` copies of a `d`-level system.
pub fn antisymmetrizer_rank(d: usize, n: usize) -> usize {
    let size = d.pow(n as u32);
    let digits = |mut x: usize| -> Vec<usize> {
        let mut v = vec![0; n];
        for slot in v.iter_mut().rev() {
            *slot = x % d;
            x /= d;
        }
        v
    };
    let index = |v: &[usize]| v.iter().fold(0, |acc, &x| acc * d + x);
    let perms = permutations(n);
    let scale = 1.0 / perms.len() as f64;
    let mut a = DMatrix::<f64>::zeros(size, size);
    for col in 0..size {
        let v = digits(col);
        for (p, s) in &perms {
            let w: Vec<usize> = p.iter().map(|&i| v[i]).collect();
            a[(index(&w), col)] += s * scale;
        }
    }
    if size == 1 {
        return usize::from(a[(0, 0)].abs() > 1e-9);
    }
    a.singular_values().iter().filter(|&&x| x > 1e-9).count()
}
