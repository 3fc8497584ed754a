//! The mobile-phone reference feature model, in FM text form and as the
//! hand-transcribed 19-clause CNF with the letter mapping `a..j = 1..10`,
//! plus a hand-built Decision-DNNF for that CNF.

use crate::cnf::{parse_dimacs, CnfFormula};
use crate::ddnnf::{parse_canonical, DdnnfCircuit};

pub const MOBILE_FM: &str = "\
MobilePhone
  Calls [mandatory]
  GPS [optional]
  Screen [mandatory]
    <alt>
      Basic
      Color
      HighResolution
  Media [optional]
    <or>
      Camera
      MP3
constraints:
  Camera => HighResolution
  GPS => !Basic
";

/// Feature names for variables 1..=10 of [`MOBILE_DIMACS`] (letters a..j).
pub const MOBILE_NAMES: [&str; 10] = [
    "MobilePhone",
    "Screen",
    "Basic",
    "Color",
    "HighResolution",
    "Media",
    "Camera",
    "MP3",
    "Calls",
    "GPS",
];

pub const MOBILE_DIMACS: &str = "\
c mobile phone, a..j = 1..10
p cnf 10 19
1 0
2 -3 0
2 -4 0
2 -5 0
3 4 5 -2 0
-3 -4 0
-3 -5 0
-4 -5 0
6 -7 0
6 -8 0
7 8 -6 0
1 -9 0
1 -10 0
1 -2 0
1 -6 0
9 -1 0
2 -1 0
-7 5 0
-10 -3 0
";

pub fn mobile_formula() -> CnfFormula {
    parse_dimacs(MOBILE_DIMACS).expect("bundled formula parses")
}

/// A Decision-DNNF equivalent to [`MOBILE_DIMACS`], in canonical form. The
/// root conjoins a, i, b with a decision on HighResolution (e); the Media
/// part is shared structure on f, g, h.
pub const MOBILE_DDNNF: &str = "\
ddnnf 21 20 10
c 0..8: leaves
T
L 1
L 9
L 2
L -3
L -4
L 8
L -8
L -7
c 9..11: media when e holds (g or h, or nothing)
D 7 0 6
A 2 8 7
D 6 9 10
c 12: e holds, so c and d are false; j is free
A 3 4 5 11
L -10
L 4
A 2 5 13
D 3 15 14
D 6 6 7
c 18: e is false, so g is false and exactly one of c, d
A 3 8 16 17
D 5 12 18
A 4 1 2 3 19
";

pub fn mobile_circuit() -> DdnnfCircuit {
    parse_canonical(MOBILE_DDNNF).expect("bundled circuit parses")
}
