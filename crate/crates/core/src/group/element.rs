use std::fmt;

use smallvec::SmallVec;

/// A free generator or its inverse, stored as `±(index + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(generator < i8::MAX as usize, "generator index out of range");
        let v = generator as i8 + 1;
        Letter(if inverse { -v } else { v })
    }

    /// Decodes the signed integer form used in JSON normal forms.
    pub fn from_signed(v: i64) -> Option<Letter> {
        if v == 0 || v.unsigned_abs() > i8::MAX as u64 {
            return None;
        }
        Some(Letter(v as i8))
    }

    pub fn signed(self) -> i64 {
        self.0 as i64
    }

    pub fn generator(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }
}

/// One entry of an alternating free-product word: a non-identity element of
/// the factor `factor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: u8,
    pub element: u16,
}

/// Normal form of a group element.
///
/// Two elements of the same group are equal iff their normal forms are
/// equal, so the derived `Eq`, `Hash` and `Ord` are the group-theoretic ones.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Coordinates in `Z^n`.
    Abelian(SmallVec<[i64; 4]>),
    /// Freely reduced word.
    Free(SmallVec<[Letter; 16]>),
    /// Alternating word with no identity syllables.
    FreeProduct(SmallVec<[Syllable; 8]>),
    /// `(a, b, c)` for the matrix `[[1, a, c], [0, 1, b], [0, 0, 1]]`.
    Heisenberg([i64; 3]),
}

impl GroupElement {
    pub fn abelian(coords: &[i64]) -> GroupElement {
        GroupElement::Abelian(SmallVec::from_slice(coords))
    }

    /// Builds a free word from signed letters (`1` is `a`, `-2` is `b^-1`),
    /// reducing it on the way.
    pub fn free_word(letters: &[i64]) -> Option<GroupElement> {
        let mut word: SmallVec<[Letter; 16]> = SmallVec::new();
        for &v in letters {
            let l = Letter::from_signed(v)?;
            push_letter(&mut word, l);
        }
        Some(GroupElement::Free(word))
    }

    pub fn heisenberg(a: i64, b: i64, c: i64) -> GroupElement {
        GroupElement::Heisenberg([a, b, c])
    }

    /// Serializes the normal form as JSON: integer vectors for abelian and
    /// Heisenberg elements, signed letters for free words and
    /// `[factor, element]` pairs for free products.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            GroupElement::Abelian(v) => json!(v.as_slice()),
            GroupElement::Free(w) => json!(w.iter().map(|l| l.signed()).collect::<Vec<_>>()),
            GroupElement::FreeProduct(w) => json!(w
                .iter()
                .map(|s| [s.factor as u64, s.element as u64])
                .collect::<Vec<_>>()),
            GroupElement::Heisenberg(t) => json!(t),
        }
    }
}

pub(crate) fn push_letter(word: &mut SmallVec<[Letter; 16]>, l: Letter) {
    if word.last() == Some(&l.inverse()) {
        word.pop();
    } else {
        word.push(l);
    }
}

fn letter_name(l: Letter) -> String {
    let g = l.generator();
    let base = if g < 26 {
        ((b'a' + g as u8) as char).to_string()
    } else {
        format!("x{}", g + 1)
    };
    if l.is_inverse() {
        format!("{base}^-1")
    } else {
        base
    }
}

impl serde::Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Abelian(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            GroupElement::Free(w) if w.is_empty() => write!(f, "e"),
            GroupElement::Free(w) => {
                let parts: Vec<String> = w.iter().map(|&l| letter_name(l)).collect();
                write!(f, "{}", parts.join(" "))
            }
            GroupElement::FreeProduct(w) if w.is_empty() => write!(f, "e"),
            GroupElement::FreeProduct(w) => {
                let parts: Vec<String> = w
                    .iter()
                    .map(|s| format!("g{}[{}]", s.factor, s.element))
                    .collect();
                write!(f, "{}", parts.join(" "))
            }
            GroupElement::Heisenberg([a, b, c]) => write!(f, "[{a},{b},{c}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_word_reduces() {
        let w = GroupElement::free_word(&[1, 2, -2, -1, 2]).unwrap();
        assert_eq!(w, GroupElement::free_word(&[2]).unwrap());
        assert_eq!(w.to_string(), "b");
        assert!(GroupElement::free_word(&[0]).is_none());
    }

    #[test]
    fn letter_round_trip() {
        let l = Letter::new(3, true);
        assert_eq!(l.generator(), 3);
        assert!(l.is_inverse());
        assert_eq!(Letter::from_signed(l.signed()), Some(l));
        assert_eq!(l.inverse().inverse(), l);
    }

    #[test]
    fn display_forms() {
        assert_eq!(GroupElement::abelian(&[1, -2]).to_string(), "(1,-2)");
        assert_eq!(GroupElement::heisenberg(1, 0, 3).to_string(), "[1,0,3]");
        assert_eq!(GroupElement::free_word(&[]).unwrap().to_string(), "e");
        assert_eq!(GroupElement::free_word(&[1, -2]).unwrap().to_string(), "a b^-1");
    }
}
