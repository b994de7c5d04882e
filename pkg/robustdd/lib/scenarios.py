"""
Named scenarios: option sets of the robustdd.core.Configuration.
Select them on the command line with --scenario.

"""
from robustdd.misc import get_register, factory, from_register
from robustdd.lib.plants import TWO_MASS_SPRING_GAIN

scenarios, register = get_register()


@register
@factory
def two_mass_spring():
    """ State feedback on the two mass spring system. """
    return {
        "mode": "state",
        "plant": "two-mass-spring",
        "gain": TWO_MASS_SPRING_GAIN,
        "w_max": 1e-3,
        "u_max": 10.,
        "x_max": 10.,
        "N": 50,
        "N_long": 5000,
        "overbound_seeds": 20,
        "L": 12,
        "Q": 1.,
        "R": 1.,
        "lambda_alpha": 100.,
        "lambda_sigma": 100.,
        "lambda_alpha_gamma": 1.,
        "lambda_sigma_gamma": 1.,
        "x0": [4., -4., 0., 0.],
        "T_sim": 40,
        "rho_method": "multistep",
        "settle_time": 28,
        "settle_level": 0.5,
    }


@register
@factory
def two_mass_spring_unstabilized():
    """ Same system without pre-stabilizing gain. """
    return {**two_mass_spring(), "gain": "zero", "hankel_input_bound": 1.75}


@register
@factory
def second_order_output():
    """ Output feedback on a stable second order difference equation. """
    return {
        "mode": "output",
        "plant": "second-order-output",
        "gain": "zero",
        "provenance": "oracle",
        "w_max": 1e-3,
        "u_max": 2.,
        "y_max": 2.,
        "hankel_input_bound": 1.,
        "record_input_bound": 1.,
        "N": 80,
        "N_long": 2000,
        "L": 10,
        "Q": 1.,
        "R": 1.,
        "lambda_alpha": 100.,
        "lambda_sigma": 100.,
        "xi0": [0., 0., 1., 1.],
        "T_sim": 30,
        "settle_time": 20,
        "settle_level": 1e-2,
    }


def get_scenario(name):
    """ Option dict of a scenario, hyphens or underscores. """
    return dict(from_register(name.replace("-", "_"), scenarios))
