//! Probabilistic prime generation (trial division + Miller-Rabin).

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand_core::CryptoRngCore;

/// 4^-41 < 2^-80 worst-case error per accepted candidate.
pub const MILLER_RABIN_ROUNDS: usize = 41;

const SIEVE_LIMIT: usize = 2048;

const fn small_prime_table() -> ([u16; SIEVE_LIMIT], usize) {
    let mut composite = [false; SIEVE_LIMIT];
    let mut table = [0u16; SIEVE_LIMIT];
    let mut count = 0;
    let mut i = 2;
    while i < SIEVE_LIMIT {
        if !composite[i] {
            table[count] = i as u16;
            count += 1;
            let mut j = i * i;
            while j < SIEVE_LIMIT {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (table, count)
}

const SMALL_PRIMES: ([u16; SIEVE_LIMIT], usize) = small_prime_table();

fn small_primes() -> &'static [u16] {
    &SMALL_PRIMES.0[..SMALL_PRIMES.1]
}

/// Returns `Some(verdict)` when trial division settles the question.
fn trial_division(n: &BigUint) -> Option<bool> {
    if n < &BigUint::from(2u8) {
        return Some(false);
    }
    for &sp in small_primes() {
        let sp_big = BigUint::from(sp);
        if n == &sp_big {
            return Some(true);
        }
        if (n % &sp_big).is_zero() {
            return Some(false);
        }
    }
    if n < &BigUint::from((SIEVE_LIMIT * SIEVE_LIMIT) as u64) {
        return Some(true);
    }
    None
}

/// One Miller-Rabin round for odd `n > 3` with `n - 1 = d * 2^s`.
fn miller_rabin_round(n: &BigUint, n_minus_1: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || &x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if &x == n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

fn split_power_of_two(n_minus_1: &BigUint) -> (BigUint, u64) {
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    (n_minus_1 >> s, s)
}

/// Miller-Rabin with `rounds` random bases.
pub fn is_probable_prime<R: CryptoRngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    if let Some(verdict) = trial_division(n) {
        return verdict;
    }
    let n_minus_1 = n - 1u8;
    let (d, s) = split_power_of_two(&n_minus_1);
    let low = BigUint::from(2u8);
    (0..rounds).all(|_| {
        let a = rng.as_rngcore().gen_biguint_range(&low, &n_minus_1);
        miller_rabin_round(n, &n_minus_1, &d, s, &a)
    })
}

/// Miller-Rabin over the fixed bases 2..=73 (the first 21 primes).
///
/// Deterministic for every `n < 3.3 * 10^24`; used to validate injected test
/// primes without a randomness source.
pub fn is_prime_fixed_bases(n: &BigUint) -> bool {
    if let Some(verdict) = trial_division(n) {
        return verdict;
    }
    let n_minus_1 = n - 1u8;
    let (d, s) = split_power_of_two(&n_minus_1);
    small_primes()
        .iter()
        .take(21)
        .all(|&b| miller_rabin_round(n, &n_minus_1, &d, s, &BigUint::from(b)))
}

/// Random prime of exactly `bits` bits with the top two bits set, so the
/// product of two such primes has exactly the sum of their bit lengths.
pub fn random_prime<R: CryptoRngCore + ?Sized>(
    bits: u64,
    max_candidates: usize,
    rng: &mut R,
) -> Option<BigUint> {
    debug_assert!(bits >= 3);
    for _ in 0..max_candidates {
        let mut candidate = rng.as_rngcore().gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(bits - 2, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, MILLER_RABIN_ROUNDS, rng) {
            return Some(candidate);
        }
    }
    None
}
