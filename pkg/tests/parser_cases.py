"""Precedence, associativity and error-position cases for the expression parser.

Value cases: (source, bindings, expected value).
Error cases: (source, exception name, byte offset).
"""

VALUE_CASES = [
    ("1+2*3", {}, 7.0),
    ("(1+2)*3", {}, 9.0),
    ("2^3^2", {}, 512.0),
    ("-2^2", {}, -4.0),
    ("(-2)^2", {}, 4.0),
    ("10-4-3", {}, 3.0),
    ("100/10/5", {}, 2.0),
    ("2*3+4*5", {}, 26.0),
    ("2+3*4^2", {}, 50.0),
    ("-3*-2", {}, 6.0),
    ("2^-1", {}, 0.5),
    ("-(1+2)", {}, -3.0),
    ("--2", {}, 2.0),
    ("1e3+1", {}, 1001.0),
    (".5*4", {}, 2.0),
    ("3.0/2", {}, 1.5),
    ("2*(3+4)*5", {}, 70.0),
    ("sqrt(16)+1", {}, 5.0),
    ("abs(-3)", {}, 3.0),
    ("exp(0)", {}, 1.0),
    ("ln(exp(2))", {}, 2.0),
    ("sin(0)+cos(0)", {}, 1.0),
    ("2^2^0", {}, 2.0),
    ("(2^2)^3", {}, 64.0),
    ("4/2*3", {}, 6.0),
    ("8-2+1", {}, 7.0),
    ("-2^-2", {}, -0.25),
    ("2*-3^2", {}, -18.0),
    ("1 + 2 * 3 - 4 / 2", {}, 5.0),
    ("((((1))))", {}, 1.0),
    ("2.5e-1*4", {}, 1.0),
    ("  7  ", {}, 7.0),
    ("t + x*s", {"t": 1.0, "x": 2.0, "s": 3.0}, 7.0),
    ("x^2^t", {"x": 2.0, "t": 3.0}, 256.0),
    ("t-s-x", {"t": 10.0, "s": 3.0, "x": 2.0}, 5.0),
]

ERROR_CASES = [
    ("2x", "ExprSyntaxError", 1),
    ("1+", "ExprSyntaxError", 2),
    ("(1+2", "ExprSyntaxError", 4),
    ("1+2)", "ExprSyntaxError", 3),
    ("*3", "ExprSyntaxError", 0),
    ("foo+1", "UnknownIdentifier", 0),
    ("1+y", "UnknownIdentifier", 2),
    ("sin 1", "ExprSyntaxError", 4),
    ("sin(1,2)", "ExprSyntaxError", 5),
    ("1 $ 2", "ExprSyntaxError", 2),
    ("", "ExprSyntaxError", 0),
    ("2 3", "ExprSyntaxError", 2),
    ("x(2)", "ExprSyntaxError", 1),
    ("1++2", "ExprSyntaxError", 2),
    ("()", "ExprSyntaxError", 1),
    ("t ^", "ExprSyntaxError", 3),
    ("exp(t", "ExprSyntaxError", 5),
    ("pi*2", "UnknownIdentifier", 0),
    ("x + é", "ExprSyntaxError", 4),
    ("éé + x + q", "ExprSyntaxError", 0),
    ("x*ü", "ExprSyntaxError", 2),
]

ALL_CASES = len(VALUE_CASES) + len(ERROR_CASES)
