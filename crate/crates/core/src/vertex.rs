use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Maximum number of coordinates carried by a vertex.
pub const MAX_DIM: usize = 6;

/// A vertex id: a component tag plus an integer coordinate payload.
///
/// Coordinates beyond the dimension of the owning graph are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex {
    pub tag: u16,
    pub x: [i32; MAX_DIM],
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { tag: 0, x: [0; MAX_DIM] };

    pub fn new(tag: u16, coords: &[i32]) -> Self {
        assert!(coords.len() <= MAX_DIM, "at most {MAX_DIM} coordinates");
        let mut x = [0; MAX_DIM];
        x[..coords.len()].copy_from_slice(coords);
        Vertex { tag, x }
    }

    pub fn at(coords: &[i32]) -> Self {
        Self::new(0, coords)
    }

    pub fn with_tag(mut self, tag: u16) -> Self {
        self.tag = tag;
        self
    }

    pub fn shifted(mut self, axis: usize, step: i32) -> Self {
        self.x[axis] += step;
        self
    }

    pub fn l1(&self) -> i64 {
        self.x.iter().map(|c| (*c as i64).abs()).sum()
    }

    pub fn l2_sq(&self) -> i64 {
        self.x.iter().map(|c| (*c as i64) * (*c as i64)).sum()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let used = self.x.iter().rposition(|c| *c != 0).map_or(1, |i| i + 1);
        write!(f, "{}:", self.tag)?;
        for (i, c) in self.x[..used].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex({self})")
    }
}

/// Parses `tag:x1,x2,...` or a bare coordinate list `x1,x2,...` (tag 0).
impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (tag, rest) = match s.split_once(':') {
            Some((t, r)) => (
                t.trim()
                    .parse::<u16>()
                    .map_err(|_| Error::Parse(format!("bad vertex tag in {s:?}")))?,
                r,
            ),
            None => (0, s),
        };
        let coords: Vec<i32> = rest
            .split(',')
            .filter(|c| !c.trim().is_empty())
            .map(|c| c.trim().parse::<i32>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad vertex coordinates in {s:?}")))?;
        if coords.len() > MAX_DIM {
            return Err(Error::Parse(format!("more than {MAX_DIM} coordinates in {s:?}")));
        }
        Ok(Vertex::new(tag, &coords))
    }
}

impl serde::Serialize for Vertex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Vertex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips() {
        for v in [Vertex::ORIGIN, Vertex::new(3, &[1, -2, 0, 4]), Vertex::at(&[0, 0, 7])] {
            let s = v.to_string();
            assert_eq!(s.parse::<Vertex>().unwrap(), v, "{s}");
        }
        assert_eq!("(1,2)".parse::<Vertex>().unwrap(), Vertex::at(&[1, 2]));
    }

    #[test]
    fn norms() {
        let v = Vertex::at(&[3, -4]);
        assert_eq!(v.l1(), 7);
        assert_eq!(v.l2_sq(), 25);
    }
}
