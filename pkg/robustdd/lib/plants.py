"""
Built-in plants and difference operator models.
Use them by setting .cfg.plant of the robustdd.core.Organizer,
e.g. plant = "two-mass-spring".

"""
from robustdd.misc import get_register, factory, from_register
from robustdd.plant import LtiPlant, DifferenceOperatorModel

# for loading via toml
plants, register = get_register()


@register
@factory
def two_mass_spring():
    """
    Two masses (0.5 kg, 1 kg) coupled by a spring (2 kg/s^2), sampled with 1 s.

    Two eigenvalues of A lie on the unit circle.

    """
    A = [[-0.1799, 1.1799, 0.507, 0.493],
         [0.59, 0.41, 0.2465, 0.7535],
         [-1.0421, 1.0421, -0.1799, 1.1799],
         [0.5211, -0.5211, 0.59, 0.41]]
    B = [[0.7266], [0.1367], [1.014], [0.493]]
    return LtiPlant(A, B, name="two-mass-spring")


# gain of a robust lqr design on noisy data of two_mass_spring
TWO_MASS_SPRING_GAIN = [[0.4345, -0.8439, -0.3665, -0.6986]]


@register
@factory
def second_order_output():
    """
    Stable scalar difference equation
    y_k = 0.4 y_{k-1} - 0.2 y_{k-2} + 0.3 u_{k-1} + 0.1 u_{k-2} + w_k.

    The rows of its non-minimal realization have unit infinity norm.
    """
    return DifferenceOperatorModel(
        a_coeffs=[[[0.2]], [[-0.4]]],
        b_coeffs=[[[0.1]], [[0.3]]],
        D=[[0.]],
        name="second-order-output")


def get_plant(toml_entry):
    """
    Plant from its registered name, hyphens or underscores.

    Parameters
    ----------
    toml_entry : str or dict or list
        See robustdd.misc.from_register.

    """
    if isinstance(toml_entry, str):
        toml_entry = toml_entry.replace("-", "_")
    elif isinstance(toml_entry, dict):
        toml_entry = {**toml_entry, "name": toml_entry["name"].replace("-", "_")}
    return from_register(toml_entry, plants)
