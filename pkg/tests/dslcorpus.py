"""Shared corpus of DSL programs for round-trip tests."""

HEADER = "config n=3 S1={1,2} S2={1,3} transversal=true orders=(0,0,0)\n"


def corpus():
    progs = []
    exprs = [
        "1",
        "2.5",
        "(1 + xi3^2)^(-1)",
        "(1 + xi1^2 + xi2^2 + xi3^2)^(-3/2)",
        "cos(x1)*xi2",
        "sin(x2) + 2",
        "-x1*xi2 + 1",
        "(1 + xi3^2)^(-1)*cos(x1)",
        "xi1^2 + xi2^2",
        "(2 + sin(x1))^3",
    ]
    for i, e in enumerate(exprs):
        progs.append(
            HEADER + f"A{i} = Op[X0]{{{e}, -1}} ; Op[X0]{{1, 1}}\nclassify A{i}\n"
        )
    progs.append(HEADER + "M = Op[X1]{1, 0} ; bd1 ; Op[X0]{(1 + xi3^2)^(-2), -2} @order 3\n")
    progs.append(HEADER + "T = bd2 ; Op[X0]{(1+xi1^2+xi2^2+xi3^2)^(-2), -2} ; cob1 @order -1/2\n")
    progs.append(
        "config n=3 S1={1,2} S2={1,3} transversal=true orders=(1,1/2,1/2)\n"
        "G = Op[X0]{1, 0} ; cob1 ; Op[X1]{(1+xi1^2+xi2^2)^(1), 1} ; bd1 ; Op[X0]{1, 0} @order 1\n"
        "normalize G\nsymbol G stratum=X1 z=0.0,0.0 zeta=1.0,0.0 M=8\n"
    )
    progs.append(
        "config n=4 S1={1,2,3} S2={1,4} transversal=true orders=(2,0,-1/2)\n"
        "B = bd2 ; Op[X0]{(1 + xi4^2)^(-2), -2} @order 2\nclassify B\n"
    )
    progs.append(HEADER + "Z = Op[X2]{cos(x3), 0}\nverify census maxlen=3\n")
    for i in range(5):
        progs.append(
            HEADER
            + f"W{i} = Op[X0]{{(1 + xi{1 + i % 3}^2)^(-1), -1}} ; Op[X0]{{sin(x{1 + i % 3}), {i}}}\n"
        )
    return progs
