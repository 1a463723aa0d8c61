"""Reference graphs and published p-values used by tests, scripts and the CLI.

The lettered panels are rebuilt from their textual descriptions: each graph
contains exactly the structure the description relies on and nothing more.
"""

from .graph import Dag, parse_graph

FIGURE1 = {
    # three instruments and an unmeasured confounder
    "scenario1": """
        C1 -> X
        C2 -> X
        C3 -> X
        U -> X
        U -> Y
        X -> Y
        latent U
    """,
    # three confounders, no unmeasured confounding
    "scenario2": """
        C1 -> X
        C2 -> X
        C3 -> X
        C1 -> Y
        C2 -> Y
        C3 -> Y
        X -> Y
    """,
}

SUPP_FIGURE1 = {
    # Z causes X; C confounds; U is the unmeasured confounder
    "a": """
        Z -> X
        C -> X
        C -> Y
        U -> X
        U -> Y
        X -> Y
        latent U
    """,
    "a_no_u": """
        Z -> X
        C -> X
        C -> Y
        X -> Y
    """,
    # Z shares an unmeasured cause K with X instead of causing it
    "b": """
        K -> Z
        K -> X
        C -> X
        C -> Y
        U -> X
        U -> Y
        X -> Y
        latent K U
    """,
    # no-reverse-causation violated: the outcome causes the exposure
    "c": """
        Z -> X
        C -> X
        C -> Y
        Y -> X
    """,
    # exposure-measurement violated: X is an error-prone measurement of the latent T
    "d": """
        Z -> T
        C -> T
        C -> Y
        T -> X
        E -> X
        T -> Y
        latent T E
    """,
    # pre-exposure covariates violated: a covariate is caused by the exposure
    "e": """
        Z -> X
        X -> C
        C -> Y
        U -> X
        U -> Y
        latent U
    """,
    # selection violated: selection caused by the exposure and by Z
    "f": """
        Z -> X
        X -> S
        Z -> S
        C -> X
        C -> Y
        U -> X
        U -> Y
        select S
        latent U
    """,
    # Z reaches Y (given C) only through X
    "g": """
        Z -> C
        Z -> X
        C -> X
        C -> Y
        X -> Y
    """,
    # Z is a non-collider on a backdoor path
    "h": """
        Z -> X
        Z -> C
        Z -> Y
        C -> X
        C -> Y
        X -> Y
    """,
    # Z is a collider on a backdoor path
    "i": """
        W -> X
        W -> Z
        L -> Z
        L -> Y
        C -> X
        C -> Y
        X -> Y
        latent W L
    """,
}

SUPP_FIGURE1_VIOLATIONS = {"c": "A1", "e": "A3", "f": "A4"}

# Example used for the collider-on-a-backdoor-path form of the classifier.
COLLIDER_EXAMPLE = """
    W -> X
    W -> Z
    U -> Z
    U -> Y
    X -> Y
"""


def figure1(scenario: int) -> Dag:
    return parse_graph(FIGURE1[f"scenario{scenario}"])


def supp_figure1(panel: str) -> Dag:
    return parse_graph(SUPP_FIGURE1[panel])


# Applied-example p-values, by covariate.
TABLE2_MODEL1 = {
    "SEP": 9.9e-6,
    "maternal schooling": 6e-4,
    "asset index": 1.2e-14,
    "maternal age": 0.6219,
    "maternal height": 1.3e-33,
    "genetic score": 1.3e-24,
    "sex": 6.9e-7,
    "birthweight": 1.7e-58,
}
TABLE2_MODEL2 = {
    "SEP": 2.7e-9,
    "maternal schooling": 5e-19,
    "asset index": 2.1e-16,
    "maternal age": 0.8050,
    "maternal height": 0.2673,
    "genetic score": 0.2821,
    "sex": 0.0003,
    "birthweight": 0.2814,
}
# socioeconomic covariates are dropped in model 3
TABLE2_MODEL3 = {
    "maternal age": 0.0012,
    "maternal height": 0.0064,
    "genetic score": 0.0032,
    "sex": 0.0005,
    "birthweight": 0.8271,
}
TABLE2_MODEL4 = {
    "maternal height": 0.0253,
    "genetic score": 0.017,
    "birthweight": 0.2890,
}
TABLE2_SOCIOECONOMIC = ("SEP", "maternal schooling", "asset index")
