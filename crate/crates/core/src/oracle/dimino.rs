//! Dimino's algorithm: the subgroup generated by a list of elements, built
//! coset by coset so it can stop the moment a size cap or a caller-supplied
//! admission test fails.

use std::collections::HashSet;
use std::hash::Hash;

use crate::endo::{BlockEndo, QElement};
use crate::error::{Error, Result};
use crate::matrix::ModMatrix;

pub trait FiniteGroupElement: Clone + Eq + Hash {
    fn op(&self, other: &Self) -> Self;
    fn is_identity(&self) -> bool;
}

impl FiniteGroupElement for BlockEndo {
    fn op(&self, other: &Self) -> Self {
        self.compose_unchecked(other)
    }

    fn is_identity(&self) -> bool {
        BlockEndo::is_identity(self)
    }
}

impl FiniteGroupElement for QElement {
    fn op(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn is_identity(&self) -> bool {
        QElement::is_identity(self)
    }
}

impl FiniteGroupElement for ModMatrix {
    fn op(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn is_identity(&self) -> bool {
        ModMatrix::is_identity(self)
    }
}

/// Why a closure stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureAbort<E> {
    Overflow,
    Rejected(E),
}

struct Builder<'a, T, E, F: FnMut(&T) -> std::result::Result<(), E>> {
    elements: Vec<T>,
    seen: HashSet<T>,
    cap: usize,
    admit: &'a mut F,
}

impl<T: FiniteGroupElement, E, F: FnMut(&T) -> std::result::Result<(), E>> Builder<'_, T, E, F> {
    fn push(&mut self, x: T) -> std::result::Result<(), ClosureAbort<E>> {
        if self.elements.len() >= self.cap {
            return Err(ClosureAbort::Overflow);
        }
        (self.admit)(&x).map_err(ClosureAbort::Rejected)?;
        self.seen.insert(x.clone());
        self.elements.push(x);
        Ok(())
    }
}

/// Closure of `gens` with an admission hook called on every new element
/// (the identity included). Returns the elements in Dimino order, starting
/// with `identity`.
pub fn dimino_closure_with<T, E, F>(
    identity: T,
    gens: &[T],
    cap: usize,
    mut admit: F,
) -> std::result::Result<Vec<T>, ClosureAbort<E>>
where
    T: FiniteGroupElement,
    F: FnMut(&T) -> std::result::Result<(), E>,
{
    let mut b = Builder { elements: Vec::new(), seen: HashSet::new(), cap, admit: &mut admit };
    b.push(identity)?;
    let mut used: Vec<T> = Vec::new();
    for s in gens {
        if b.seen.contains(s) {
            continue;
        }
        used.push(s.clone());
        if used.len() == 1 {
            let mut x = s.clone();
            while !x.is_identity() {
                let next = x.op(s);
                b.push(x)?;
                x = next;
            }
            continue;
        }
        let prev = b.elements.len();
        for j in 0..prev {
            let x = b.elements[j].op(s);
            b.push(x)?;
        }
        let mut rep_pos = prev;
        while rep_pos < b.elements.len() {
            for t in &used {
                let rep = b.elements[rep_pos].op(t);
                if !b.seen.contains(&rep) {
                    for j in 0..prev {
                        let x = b.elements[j].op(&rep);
                        b.push(x)?;
                    }
                }
            }
            rep_pos += prev;
        }
    }
    Ok(b.elements)
}

/// Closure of `gens`, or [`Error::Overflow`] as soon as it exceeds `cap` elements.
pub fn dimino_closure<T: FiniteGroupElement>(identity: T, gens: &[T], cap: usize) -> Result<Vec<T>> {
    dimino_closure_with(identity, gens, cap, |_| Ok::<(), ()>(())).map_err(|_| Error::Overflow { cap })
}
