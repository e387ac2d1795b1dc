//! Declarations available to every document.

pub const PRELUDE: &str = r#"builtin N
builtin Z
builtin F1

# affine line, its torus, and the projective line
blueprint A1 = F1[x]
blueprint Ay = F1[y]
blueprint T = A1[1/x]
morphism tx : A1 -> T { }
morphism ty : Ay -> T { y -> x_inv }
presentation P1 { charts X = A1, Y = Ay, XY = T; arrows XY -> X = tx, XY -> Y = ty; }
presentation SpecF1 = spec F1
presentation SpecA1 = spec A1

# the non-global blueprint and its cover by U_g, U_h
blueprint B_ex = F1[a, b, g, h] / { a*h = b*g, g + h = 1 }
presentation Bex_cover = cover B_ex by g, h

# the natural numbers
blueprint N6 = N[1/6]
presentation SpecN = spec N
presentation N_cover = cover N by 10, 21
module Scaled over N = <X1, X2> / { 2*X2 = 3*X1 }
"#;
