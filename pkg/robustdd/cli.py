"""
Robust data-driven predictive control from the command line.

Usage:
    robustdd collect [options]
    robustdd estimate [options]
    robustdd coefficients [options]
    robustdd run [options]
    robustdd reproduce-example [options]
    robustdd (-h | --help)
    robustdd --version

Commands:
    collect            Record the hankel dataset and the long record.
    estimate           Estimate the system constants from the recorded data.
    coefficients       Compute and plot the constraint tightening coefficients.
    run                Full pipeline, then the closed loop runs.
    reproduce-example  Run the two mass spring example and print a pass/fail
                       table of the acceptance criteria.

Options:
    -h --help              Show this screen.
    --version              Show the version.
    --config PATH          A .toml file with the options of the experiment.
                           The possible options are listed in core.py in the
                           class Configuration.
    --out DIR              Output folder [default: ./out].
    --seed INT             Overrides the seed of the data collection.
    --provenance NAME      'data' or 'oracle' constants.
    --scenario NAME        A built-in scenario, e.g. two-mass-spring or
                           second-order-output. Options of the config file
                           take precedence.
    --n-seeds INT          Number of closed loop runs.

Exit codes:
    0  success
    1  a monitor or acceptance criterion failed
    2  configuration error
    3  numerical failure

"""
from matplotlib import use
use('Agg')

from docopt import docopt

from robustdd import __version__
from robustdd.core import Organizer
from robustdd.misc import (
    ConfigurationError, DimensionError, EstimationError, ExcitationError,
    FeasibilityError, HorizonError, ModelError)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

COMMANDS = ("collect", "estimate", "coefficients", "run", "reproduce-example")


def _overrides(args):
    kwargs = {}
    if args["--seed"] is not None:
        kwargs["seed"] = _integer(args["--seed"], "--seed")
    if args["--provenance"] is not None:
        kwargs["provenance"] = args["--provenance"]
    if args["--n-seeds"] is not None:
        kwargs["n_seeds"] = _integer(args["--n-seeds"], "--n-seeds")
    return kwargs


def _integer(value, name):
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{name}: not an integer: {value}")


def execute(command, output_folder, config_file=None, scenario=None, **kwargs):
    """
    Run one command.

    Parameters
    ----------
    command : str
        One of collect, estimate, coefficients, run, reproduce-example.
    output_folder : str
    config_file : str, optional
    scenario : str, optional
    kwargs
        Options overriding the scenario and the config file.

    Returns
    -------
    bool
        False if a monitor or criterion failed.

    """
    if command == "reproduce-example":
        if scenario is None and config_file is None:
            scenario = "two-mass-spring"
        kwargs.setdefault("n_seeds", 10)
    orga = Organizer(output_folder, config_file=config_file, scenario=scenario, **kwargs)

    if command == "collect":
        orga.collect()
    elif command == "estimate":
        orga.estimate()
    elif command == "coefficients":
        orga.coefficients()
    elif command == "run":
        results = orga.run()
        return all(monitors.passed for _, monitors in results.values())
    elif command == "reproduce-example":
        return orga.reproduce_example()
    else:
        raise ConfigurationError(f"Unknown command {command}")
    return True


def main(argv=None):
    args = docopt(__doc__, argv=argv, version=f"robustdd {__version__}")
    command = next(cmd for cmd in COMMANDS if args[cmd])
    try:
        passed = execute(command, args["--out"], config_file=args["--config"],
                         scenario=args["--scenario"], **_overrides(args))
    except (ConfigurationError, HorizonError, FileNotFoundError) as e:
        print(f"Configuration error: {e}")
        return EXIT_CONFIG
    except FeasibilityError as e:
        print(f"Numerical failure: {e}")
        if e.violated_row is not None:
            print(f"Most violated constraint: {e.violated_row}")
        return EXIT_NUMERICAL
    except (EstimationError, ExcitationError, DimensionError, ModelError) as e:
        print(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    return EXIT_OK if passed else EXIT_FAILED


if __name__ == '__main__':
    raise SystemExit(main())
