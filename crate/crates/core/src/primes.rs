//! Primality testing, prime search in intervals and a sieve for gap sweeps.

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// The first 13 primes. As Miller-Rabin bases they decide primality for
/// every `n < 3.317e24`.
const DETERMINISTIC_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Extra bases above the deterministic range; each composite survives a
/// random base with probability at most 1/4, so 64 bases give `2^-128`.
const EXTRA_BASES: usize = 64;

const MR_SEED: u64 = 0x05ee_d0fb_45e5;

fn deterministic_limit() -> BigInt {
    "3317044064679887385961981".parse().unwrap()
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Miller-Rabin with fixed bases: exact below `3.317e24`, error at most
/// `2^-128` above (bases drawn from a fixed-seed generator, so the answer
/// is reproducible).
pub fn is_prime(n: &BigInt) -> bool {
    if n < &BigInt::from(2) {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigInt::from(p);
        if n == &p {
            return true;
        }
        if n.is_multiple_of(&p) {
            return false;
        }
    }
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let witness = |a: &BigInt| -> bool {
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            return false;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_1 {
                return false;
            }
        }
        true
    };
    if DETERMINISTIC_BASES.iter().any(|&a| witness(&BigInt::from(a))) {
        return false;
    }
    if n < &deterministic_limit() {
        return true;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(MR_SEED);
    let two = BigInt::from(2);
    (0..EXTRA_BASES).all(|_| !witness(&rng.gen_bigint_range(&two, &n_minus_1)))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = p as u64;
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &DETERMINISTIC_BASES[..12] {
        let mut x = pow_mod(a as u64, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Smallest prime in `[lo, hi]`.
pub fn find_prime_in(lo: &BigInt, hi: &BigInt) -> Result<BigInt> {
    let mut n = lo.max(&BigInt::from(2)).clone();
    while &n <= hi {
        if is_prime(&n) {
            return Ok(n);
        }
        n += 1u32;
    }
    Err(Error::NoPrimeInInterval {
        lo: lo.to_string(),
        hi: hi.to_string(),
    })
}

/// Primes of `[lo, hi]` in ascending order, lazily.
pub fn primes_in(lo: &BigInt, hi: &BigInt) -> impl Iterator<Item = BigInt> {
    let mut n = lo.max(&BigInt::from(2)).clone();
    let hi = hi.clone();
    std::iter::from_fn(move || {
        while n <= hi {
            let c = n.clone();
            n += 1u32;
            if is_prime(&c) {
                return Some(c);
            }
        }
        None
    })
}

/// Sieve of Eratosthenes: `flags[k]` is true iff `k` is prime, `k <= n`.
pub fn sieve(n: usize) -> Vec<bool> {
    let mut flags = vec![true; n + 1];
    flags[0] = false;
    if n >= 1 {
        flags[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if flags[i] {
            let mut j = i * i;
            while j <= n {
                flags[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    flags
}

/// Every `Q` in `[lo, hi]` for which `[Q, Q + Q^(3/4)]` has no prime.
///
/// The check `(p - Q)^4 <= Q^3` for the next prime `p >= Q` is exact.
pub fn prime_gap_failures(lo: u64, hi: u64) -> Vec<u64> {
    let hi_f = hi as f64;
    let limit = (hi_f + 2.0 * hi_f.powf(0.75) + 1000.0) as usize;
    let flags = sieve(limit);
    let mut next = vec![0u64; limit + 2];
    let mut upcoming = u64::MAX;
    for k in (0..=limit).rev() {
        if flags[k] {
            upcoming = k as u64;
        }
        next[k] = upcoming;
    }
    (lo..=hi)
        .filter(|&q| {
            let p = next[q as usize];
            if p == u64::MAX {
                return true;
            }
            let gap = (p - q) as u128;
            gap.pow(4) > (q as u128).pow(3)
        })
        .collect()
}

/// Inverse of `a` modulo `m` (`m > 1`), when `gcd(a, m) = 1`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Whether `gcd(a, b) = 1`.
pub fn coprime(a: &BigInt, b: &BigInt) -> bool {
    a.gcd(b).is_one() || (a.is_zero() && b.abs().is_one())
}
