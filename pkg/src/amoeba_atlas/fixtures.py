"""Named plane curves used in tests, examples and the README."""

CURVES = {
    # three-term triangle with a small interior coefficient: no hole
    "triangle-no-hole": "x + y + x^2*y^2 + x*y/2",
    # same triangle with a large interior coefficient: one bounded component
    "triangle-hole": "x + y + x^2*y^2 + 2*x*y",
    # diamond whose vertex part factors as (x + y)(1 + x*y)
    "diamond-cross": "x + y + x*y^2 + x^2*y + x*y/2",
    "diamond-hole": "x + y + x*y^2 + x^2*y + 5*x*y",
    # every lattice point of the Newton polygon is an order
    "optimal-five": "x + 30*x*y + 20*x^2*y + x^3*y + y^2",
    # six boundary orders, three interior orders missing
    "missing-three": "1 + 3*x + 3*y + x^2*y + 4*x^3*y + x*y^2 + 10*x^2*y^2 + 4*x*y^3",
}

EXTRA_CURVES = {
    "line": "1 + x + y",
    "optimal-eleven": "x + x^2 + y + x*y^3 + x^4*y^2 + 3*x^3*y + 10*x*y + 10*x^2*y + 10*x*y^2 + 15*x^2*y^2 + 10*x^3*y^2",
}

PLANE = "1 + x + y + z"
