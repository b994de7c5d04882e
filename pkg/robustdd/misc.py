""" Odds and ends: object registers and the exceptions of robustdd. """
import inspect


def get_register():
    """ E.g. for storing built-in plants or qp backends by name. """
    saved = {}

    def register(obj):
        saved[obj.__name__] = obj
        return obj
    return saved, register


def from_register(toml_entry, register):
    """
    Get an initialized object via a toml entry.
    Used for loading built-in plants, scenarios and qp backends.

    Parameters
    ----------
    toml_entry : str or dict or list
        The entry given in the config toml.
        E.g., to initialize "obj_name" from register, these are possible formats:
        "obj_name"
        ["obj_name", 0.5]
        ["obj_name", {"setting_1": True}]
        {"name": "obj_name", "setting_1": True}
    register : dict
        Maps names to class or function references.

    """
    args, kwargs = [], {}
    if isinstance(toml_entry, str):
        name = toml_entry
    elif isinstance(toml_entry, dict):
        if "name" not in toml_entry:
            raise KeyError(f"missing entry in dict: 'name', given: {toml_entry}")
        name = toml_entry["name"]
        kwargs = {k: v for k, v in toml_entry.items() if k != "name"}
    else:
        name = toml_entry[0]
        if len(toml_entry) == 2 and isinstance(toml_entry[1], dict):
            kwargs = toml_entry[1]
        else:
            args = toml_entry[1:]

    if name not in register:
        raise KeyError(f"Unknown name {name}, must be one of {sorted(register)}")
    obj = register[name]
    try:
        if inspect.isfunction(obj) and not getattr(obj, "is_factory", False):
            if args or kwargs:
                raise TypeError(f"Can not pass arguments to function ({args}, {kwargs})")
            return obj
        else:
            return obj(*args, **kwargs)
    except TypeError:
        raise TypeError(f"Error initializing {obj}")


def factory(func):
    """ Mark a registered function as a factory, i.e. it gets called by from_register. """
    func.is_factory = True
    return func


class DimensionError(ValueError):
    """ Shapes of sequences or matrices do not fit together. """


class ExcitationError(RuntimeError):
    """ No persistently exciting input could be generated. """


class OracleUnavailableError(LookupError):
    """ An oracle-only quantity was requested, but the true data is missing. """


class EstimationError(RuntimeError):
    """ A system constant could not be estimated from data. """


class UnboundedConstantError(EstimationError):
    """ The S-lemma problem is infeasible up to the cap. """


class ToleranceError(EstimationError):
    """ A bisection or line search did not reach its tolerance. """


class HorizonError(ValueError):
    """ The prediction horizon is too short for the system order. """


class ModelError(ValueError):
    """ A model or program is malformed, e.g. an indefinite cost matrix. """


class FeasibilityError(RuntimeError):
    """
    An optimal control problem turned out to be infeasible.

    Parameters
    ----------
    message : str
        Description.
    x_t : ndarray, optional
        The measured state (or extended state) the problem was set up for.
    violated_row : str, optional
        Label of the most violated constraint row of the last iterate.

    """
    def __init__(self, message, x_t=None, violated_row=None):
        super().__init__(message)
        self.x_t = x_t
        self.violated_row = violated_row


class ConfigurationError(ValueError):
    """ Invalid or unknown option in the experiment configuration. """
