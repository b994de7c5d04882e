#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Core scripts for the robustdd package.
"""

import os
import time
from datetime import timedelta
import numpy as np
import toml

import robustdd.lib as lib
import robustdd.logging as logging
from robustdd.in_out import IOHandler, save_dataset
from robustdd.misc import ConfigurationError
from robustdd.plant import (
    LtiPlant, DifferenceOperatorModel, build_extended, collect_state_data,
    collect_output_data, sample_disturbance)
from robustdd.signals import generate_pe_input
from robustdd.constants import (
    SystemConstants, estimate_rho_dbar, estimate_cpe, estimate_gamma, estimate_etas,
    oracle_constants, oracle_etas, select_hankel_window, scalar_bound_check)
from robustdd.convex import benchmark_box_qps
from robustdd.tightening import (
    TighteningCoefficients, prediction_error_constants, sf_coefficients)
from robustdd.ocp import SfOcpSpec, OfOcpSpec, weight_matrix, hankel_reproduction_error
from robustdd.mpc import run_sf_closed_loop, run_of_closed_loop, settled_within
from robustdd.utilities.visualization import plot_coefficients, plot_trace

# qp backends by their config name
QP_BACKENDS = {"admm": "AdmmSolver", "osqp": "OsqpSolver"}
# sections of the config file, all are flattened
CONFIG_SECTIONS = ("config", "plant", "bounds", "data", "ocp", "simulation")
# keys of a plant table given in the config file
PLANT_KEYS = ("A", "B", "C", "D", "a_coeffs", "b_coeffs")


class Organizer:
    """
    Core class for running the data-driven predictive control pipeline.

    The stages collect, estimate, coefficients and run write their
    results into subfolders of the output folder, and every later
    stage reads them from there.

    Attributes
    ----------
    cfg : robustdd.core.Configuration
        Contains all configurable options.
    io : robustdd.in_out.IOHandler
        Utility functions for accessing the info in cfg.

    """
    def __init__(self, output_folder, config_file=None, scenario=None, **kwargs):
        """
        Set the attributes of the Configuration object.

        Parameters
        ----------
        output_folder : str
            Name of the folder in which everything will be saved.
        config_file : str, optional
            Path to a toml config file with settings that are used instead of
            the default ones.
        scenario : str, optional
            Name of a built-in scenario, applied before the config file.
        kwargs
            Overwrite the values of the scenario and the config file.

        """
        self.cfg = Configuration(output_folder, config_file, scenario, **kwargs)
        self.io = IOHandler(self.cfg)

    def _header(self, title):
        self.io.print_log(["", "-" * 60, title, "-" * 60])

    def collect(self):
        """
        Record the hankel dataset (length N) and the long record (length N').

        Returns
        -------
        hankel, record : robustdd.plant.DataSet

        """
        cfg = self.cfg
        plant = cfg.get_plant()
        cfg.validate(plant)
        gain = cfg.get_gain(plant)
        self._header(f"Collecting data of {getattr(plant, 'name', None) or 'plant'}")
        seeds = stream_seeds(cfg.seed, 4)
        record = self.long_record()
        if cfg.mode == "state":
            dim, order = plant.n, cfg.L + plant.n + 1
        else:
            dim, order = plant.p, cfg.L + 2 * plant.n

        if cfg.select_window:
            hankel, c_pe, start = select_hankel_window(record, cfg.N, cfg.L, order)
            self.io.print_log(f"Selected window at {start} with c_pe = {c_pe:.6g}")
        else:
            nu = generate_pe_input(plant.m, cfg.N, cfg.get_input_bound("hankel"), order, seeds[0])
            w = sample_disturbance(dim, cfg.N, cfg.w_max, seeds[1])
            hankel = self._record_data(plant, gain, nu, w, cfg.seed)

        for which, data in (("hankel", hankel), ("record", record)):
            folder = self.io.get_dataset_folder(which, create=True)
            save_dataset(data, folder)
            self.io.print_log(f"Saved {data} to {folder}")
        return hankel, record

    def _record_data(self, plant, gain, nu, w, seed):
        if self.cfg.mode == "state":
            return collect_state_data(plant, gain, nu, w, w_max=self.cfg.w_max, seed=seed)
        return collect_output_data(plant, gain, nu, w, w_max=self.cfg.w_max, seed=seed)

    def long_record(self, seed=None):
        """
        The record of length N', excited uniformly from the input
        constraint set.

        Parameters
        ----------
        seed : int, optional
            Seed of the data collection, default cfg.seed.

        Returns
        -------
        robustdd.plant.DataSet

        """
        cfg = self.cfg
        seed = cfg.seed if seed is None else seed
        plant = cfg.get_plant()
        gain = cfg.get_gain(plant)
        dim = plant.n if cfg.mode == "state" else plant.p
        seeds = stream_seeds(seed, 4)
        rng = np.random.default_rng(seeds[2])
        bound = cfg.get_input_bound("record")
        nu = rng.uniform(-bound, bound, size=(cfg.N_long, plant.m))
        w = sample_disturbance(dim, cfg.N_long, cfg.w_max, seeds[3])
        return self._record_data(plant, gain, nu, w, seed)

    def estimate(self, provenance=None):
        """
        Estimate the system constants from the datasets, or take the true
        ones of the plant if provenance is 'oracle'.

        Returns
        -------
        robustdd.constants.SystemConstants

        """
        cfg = self.cfg
        provenance = cfg.provenance if provenance is None else provenance
        plant = cfg.get_plant()
        cfg.validate(plant)
        gain = cfg.get_gain(plant)
        hankel, record = self.io.load_datasets()
        self._header(f"Estimating system constants ({provenance})")
        k_bar = float(np.linalg.norm(gain, np.inf))

        if cfg.mode == "state":
            if provenance == "oracle":
                consts = oracle_constants(plant, gain, cfg.L, cfg.N, cfg.w_max,
                                          nu=hankel.nu, x0=hankel.state[0])
            else:
                rho, dbar = estimate_rho_dbar(record, cfg.N, method=cfg.rho_method,
                                              sigma_cap=cfg.sigma_cap)
                c_pe = estimate_cpe(hankel, cfg.L)
                gamma = estimate_gamma(
                    hankel, cfg.x_max, lambda_alpha=cfg.lambda_alpha_gamma,
                    lambda_sigma=cfg.lambda_sigma_gamma, **cfg.get_solver_kwargs())
                consts = SystemConstants(
                    rho=rho, dbar=dbar, c_pe=c_pe, gamma=gamma, k_bar=k_bar,
                    provenance={name: "data" for name in ("rho", "dbar", "c_pe", "gamma", "k_bar")})
        else:
            if provenance == "oracle":
                etas = oracle_etas(plant, gain)
            else:
                etas = estimate_etas(record, sigma_cap=cfg.sigma_cap)
            consts = SystemConstants(k_bar=k_bar, eta=etas,
                                     provenance={"eta": provenance, "k_bar": provenance})

        self.io.get_subfolder("constants", create=True)
        file = self.io.get_constants_path(provenance)
        consts.to_toml(file)
        self.io.print_log([f"{consts}", f"Saved constants to {file}"])
        return consts

    def coefficients(self, provenances=None):
        """
        Tightening coefficients of the state feedback scheme, as csv and
        one plot per coefficient family.

        Parameters
        ----------
        provenances : list, optional
            Constants to use, default the configured provenance. Coefficients
            of every other provenance with saved constants are plotted too.

        Returns
        -------
        dict
            Provenance -> TighteningCoefficients.

        """
        cfg = self.cfg
        if cfg.mode != "state":
            self.io.print_log("Output feedback uses the eta constants directly, "
                              "no tightening coefficients to compute")
            return {}
        plant = cfg.get_plant()
        cfg.validate(plant)
        provenances = [cfg.provenance] if provenances is None else list(provenances)
        for other in ("data", "oracle"):
            if other not in provenances and os.path.isfile(self.io.get_constants_path(other)):
                provenances.append(other)

        self._header("Computing tightening coefficients")
        self.io.get_subfolder("coefficients", create=True)
        result = {}
        for provenance in provenances:
            file = self.io.get_constants_path(provenance)
            if not os.path.isfile(file):
                raise FileNotFoundError(f"No constants file {file}, run estimate first")
            consts = SystemConstants.from_toml(file)
            pec = prediction_error_constants(consts, cfg.L, cfg.N)
            coeff = sf_coefficients(pec, consts, cfg.L, plant.n, cfg.x_max, cfg.w_max, N=cfg.N)
            coeff.to_csv(self.io.get_coefficients_path(provenance))
            result[provenance] = coeff
            self.io.print_log(f"{provenance}: max a_c = {np.max(coeff.a_c):.6g}, "
                              f"max b_c = {np.max(coeff.b_c):.6g}")

        plot_coefficients(result, self.io.get_plot_path("coefficients_a.svg", create=True),
                          family="a", bound=cfg.x_max)
        plot_coefficients(result, self.io.get_plot_path("coefficients_b.svg"),
                          family="b", bound=cfg.u_max)
        return result

    def _ensure_artifacts(self, provenance):
        """ Build the missing outputs of the earlier stages. """
        if not os.path.isfile(os.path.join(self.io.get_dataset_folder("hankel"), "meta.toml")):
            self.collect()
        if not os.path.isfile(self.io.get_constants_path(provenance)):
            self.estimate(provenance)
        if self.cfg.mode == "state" and not os.path.isfile(
                self.io.get_coefficients_path(provenance)):
            self.coefficients([provenance])

    def get_ocp_spec(self, provenance=None):
        """ The optimal control problem set up from the saved artifacts. """
        cfg = self.cfg
        provenance = cfg.provenance if provenance is None else provenance
        plant = cfg.get_plant()
        gain = cfg.get_gain(plant)
        hankel, _ = self.io.load_datasets()
        consts = SystemConstants.from_toml(self.io.get_constants_path(provenance))
        weights = dict(Q=cfg.Q, R=cfg.R, lambda_alpha=cfg.lambda_alpha,
                       lambda_sigma=cfg.lambda_sigma, w_max=cfg.w_max, u_max=cfg.u_max)
        if cfg.mode == "state":
            coeff = TighteningCoefficients.from_csv(self.io.get_coefficients_path(provenance))
            pec = prediction_error_constants(consts, cfg.L, cfg.N)
            return SfOcpSpec.from_data(hankel, cfg.L, coeff, pec, x_max=cfg.x_max,
                                       K=gain, **weights)
        return OfOcpSpec.from_data(hankel, cfg.L, consts.eta, y_max=cfg.y_max,
                                   K_tilde=gain, **weights)

    def run(self, provenance=None):
        """
        Closed loop runs for the seeds sim_seed, ..., sim_seed + n_seeds - 1.

        Missing datasets, constants and coefficients are built first.
        Per seed, the trace is saved as csv and table log, the monitors
        of all runs go to runs/monitors.toml.

        Returns
        -------
        dict
            Seed -> (ClosedLoopTrace, Monitors).

        """
        cfg = self.cfg
        provenance = cfg.provenance if provenance is None else provenance
        plant = cfg.get_plant()
        cfg.validate(plant)
        self._ensure_artifacts(provenance)
        spec = self.get_ocp_spec(provenance)
        self._header(f"Closed loop with {provenance} constants")

        monitor_logger = logging.MonitorLogger(
            os.path.join(self.io.get_subfolder("runs", create=True), f"monitors_{provenance}.toml"))
        results = {}
        start_time = time.time()
        for seed in range(cfg.sim_seed, cfg.sim_seed + cfg.n_seeds):
            if cfg.mode == "state":
                trace, monitors = run_sf_closed_loop(
                    plant, spec, cfg.get_x0(plant), cfg.T_sim, seed=seed,
                    check_prediction=(provenance == "oracle"), **cfg.get_solver_kwargs())
            else:
                trace, monitors = run_of_closed_loop(
                    plant, spec, cfg.T_sim, warmup=cfg.warmup, xi0=cfg.get_xi0(plant),
                    seed=seed, **cfg.get_solver_kwargs())
            folder = self.io.get_run_folder(f"{seed}_{provenance}", create=True)
            trace.to_csv(os.path.join(folder, "trace.csv"))
            logging.log_trace(trace, os.path.join(folder, "trace_log.txt"))
            monitor_logger.add(f"seed_{seed}", monitors)
            results[seed] = (trace, monitors)
            self.io.print_log(
                f"Seed {seed}: feasible {monitors.recursive_feasibility}, "
                f"constraints {monitors.constraint_satisfaction}, "
                f"settling time {monitors.practical_stability.settling_time}")
        monitor_logger.write()

        first_trace = results[cfg.sim_seed][0]
        plot_trace(first_trace, self.io.get_plot_path(f"trace_{provenance}.svg", create=True))
        elapsed = timedelta(seconds=int(time.time() - start_time))
        self.io.print_log(f"Closed loop runs done in {elapsed}, "
                          f"all monitors passed: {monitor_logger.passed}")
        return results

    def reproduce_example(self, output_feedback=True):
        """
        Run the two mass spring example and check it against the
        acceptance criteria.

        The criteria are printed as pass/fail table and saved to report.txt.

        Parameters
        ----------
        output_feedback : bool
            Also run the second order output feedback scenario, in the
            subfolder output_feedback/.

        Returns
        -------
        bool
            Whether all criteria passed.

        """
        cfg = self.cfg
        plant = cfg.get_plant()
        cfg.validate(plant)
        n = plant.n
        rows = []

        self.collect()
        self.estimate("data")
        oracle_consts = self.estimate("oracle")
        coeffs = self.coefficients(["data", "oracle"])

        runs = self.run("data")
        feasible = all(m.recursive_feasibility for _, m in runs.values())
        satisfied = all(m.constraint_satisfaction for _, m in runs.values())
        settled = all(settled_within(trace, cfg.settle_time, cfg.settle_level)
                      for trace, _ in runs.values())
        late = [np.abs(trace.signals[trace.t >= cfg.settle_time]) for trace, _ in runs.values()]
        worst = max(float(np.max(s)) if s.size else np.inf for s in late)
        rows.append(("closed loop feasible", f"{len(runs)} seeds", "all", feasible))
        rows.append(("constraints satisfied", f"{len(runs)} seeds", "all", satisfied))
        rows.append((f"|x_t| after t={cfg.settle_time}", worst, cfg.settle_level, settled))

        unstabilized = Configuration(cfg.output_folder, scenario="two-mass-spring-unstabilized",
                                     seed=cfg.seed)
        zero_gain = np.zeros((plant.m, n))
        zero_consts = oracle_constants(
            plant, zero_gain, cfg.L, cfg.N, cfg.w_max,
            input_bound=unstabilized.get_input_bound("hankel"),
            seed=stream_seeds(cfg.seed, 1)[0])
        zero_coeff = sf_coefficients(
            prediction_error_constants(zero_consts, cfg.L, cfg.N), zero_consts,
            cfg.L, n, cfg.x_max, cfg.w_max, N=cfg.N)
        a_c = float(zero_coeff.a_c[n])
        rows.append((f"a_c,{n} without gain", a_c, "[150, 350]", 150 <= a_c <= 350 and a_c > cfg.x_max))

        k = np.arange(cfg.L + 1)
        overbound_violations = 0
        for seed in range(cfg.seed, cfg.seed + cfg.overbound_seeds):
            rho, dbar = estimate_rho_dbar(self.long_record(seed), cfg.N, method=cfg.rho_method,
                                          sigma_cap=cfg.sigma_cap)
            count = int(np.sum(rho[k] < oracle_consts.rho[k] * (1 - 1e-12))
                        + np.sum(dbar[k] < oracle_consts.dbar[k] * (1 - 1e-12)))
            if count:
                self.io.print_log(f"Data seed {seed}: {count} values of rho, dbar below the "
                                  f"true ones")
            overbound_violations += count
        rows.append(("rho, dbar below oracle, k <= L", overbound_violations,
                     f"0 in {cfg.overbound_seeds} seeds", overbound_violations == 0))

        b_c = float(np.max(coeffs["data"].b_c))
        rows.append(("max b_c", b_c, f"< {cfg.u_max:g}", b_c < cfg.u_max))

        oracle_runs = self.run("oracle")
        violations = sum(m.prediction_violations or 0 for _, m in oracle_runs.values())
        rows.append(("prediction error bound", violations, "0 violations", violations == 0))

        error = hankel_reproduction_error(plant, cfg.get_gain(plant), cfg.L, cfg.N,
                                          seed=cfg.seed)
        rows.append(("noise free hankel reproduction", error, "<= 1e-8", error <= 1e-8))

        scalar = scalar_bound_check()
        rows.append(("scalar sigma_A, a = 0.5", scalar.sigma, "[0.5, 0.51]",
                     0.5 - 1e-6 <= scalar.sigma <= 0.51))
        monotone = bool(np.all(np.diff(scalar.sweep) >= -1e-6 * scalar.sweep[-1])
                        and scalar.sweep[-1] > scalar.sweep[0])
        rows.append(("sigma_A over noise energy", f"{len(scalar.sweep)} energies", "monotone",
                     monotone))

        benchmark = benchmark_box_qps(**cfg.get_solver_kwargs())
        rows.append(("qp objective vs reference", benchmark.max_objective_error, "<= 1e-5",
                     benchmark.max_objective_error <= 1e-5))
        rows.append(("qp KKT residual", benchmark.max_kkt, "<= 1e-7",
                     benchmark.all_optimal and benchmark.max_kkt <= 1e-7))

        if output_feedback:
            of_orga = Organizer(cfg.output_folder + "output_feedback", scenario="second-order-output",
                                seed=cfg.seed, sim_seed=cfg.sim_seed, qp_backend=cfg.qp_backend)
            of_cfg = of_orga.cfg
            of_runs = of_orga.run()
            of_ok = all(m.recursive_feasibility and m.constraint_satisfaction
                        for _, m in of_runs.values())
            of_settled = all(settled_within(trace, of_cfg.settle_time, of_cfg.settle_level)
                             for trace, _ in of_runs.values())
            rows.append(("output feedback feasible", f"{len(of_runs)} seeds", "all", of_ok))
            rows.append((f"|y_t| after t={of_cfg.settle_time}", "", of_cfg.settle_level,
                         of_settled))

        passed = all(row[-1] for row in rows)
        report_file = cfg.output_folder + "report.txt"
        with open(report_file, "w") as f:
            logger = logging.TableLogger(f, ["Criterion", "Value", "Threshold", "Passed"])
            logger.level_file()
            for row in rows:
                logger.write_line(list(row))
        with open(report_file) as f:
            self._header("Reproduction report")
            self.io.print_log(f.read().splitlines())
        self.io.print_log(f"All criteria passed: {passed}")
        return passed


class Configuration(object):
    """
    Contains all the configurable options of an experiment.

    All of these public attributes (the ones without a
    leading underscore) can be changed either directly, via a named
    scenario or with a .toml config file via the method update_config().

    Parameters
    ----------
    output_folder : str
        Name of the folder in which everything will be saved.
    config_file : str or None
        Path to a toml config file with attributes that are used instead of
        the default ones.
    scenario : str or None
        Name of a scenario in robustdd.lib.scenarios.
    kwargs
        Overwrites the values given in the config file.

    Attributes
    ----------
    mode : str
        'state' for state feedback, 'output' for output feedback.
    plant : str or dict
        Name of a built-in plant, or a table with the matrices A, B
        (and optionally C, D), or a_coeffs, b_coeffs and D of a
        difference operator model. Matrices are nested lists or paths
        to csv files.
    gain : str or list
        Pre-stabilizing gain K (or K_tilde), "zero" for K = 0.
    w_max, u_max, x_max, y_max : float
        Disturbance, input, state and output bound.
    N : int
        Length of the hankel dataset.
    N_long : int
        Length N' of the record used for estimating rho, dbar and eta.
    seed : int
        Seed of the data collection.
    overbound_seeds : int
        Number of data seeds, seed, seed + 1, ..., on which reproduce
        checks that the estimated rho and dbar overbound the true ones.
    hankel_input_bound : float or None
        Amplitude of the input of the hankel dataset, default u_max.
    record_input_bound : float or None
        Amplitude of the input of the long record, default u_max.
    select_window : bool
        If true, the hankel dataset is the window of the long record
        with the smallest c_pe.
    L : int
        Prediction horizon.
    Q, R : float or list
        Weights of the cost, a scalar means a multiple of the identity.
    lambda_alpha, lambda_sigma : float
        Regularization of the optimal control problem.
    lambda_alpha_gamma, lambda_sigma_gamma : float
        Regularization of the problems for the controllability constant.
    provenance : str
        'data' or 'oracle' constants.
    rho_method : str
        'power' or 'multistep', see robustdd.constants.estimate_rho_dbar.
    sigma_cap : float
        Cap of the S-lemma bisections.
    qp_backend : str
        'admm' or 'osqp'.
    qp_tol : float
    qp_max_iter : int
    x0 : list or None
        Initial state of the closed loop, default 0.
    xi0 : list or None
        Extended state before the warm-up (output mode), default 0.
    warmup : int or None
        Warm-up steps of the output feedback loop, default n.
    T_sim : int
        Closed loop steps.
    sim_seed : int
        Seed of the disturbance of the first closed loop run.
    n_seeds : int
        Number of closed loop runs, with seeds sim_seed, sim_seed + 1, ...
    settle_time : int
        First step at which the signal has to be below settle_level.
    settle_level : float

    """
    def __init__(self, output_folder, config_file=None, scenario=None, **kwargs):
        """
        Set the attributes of the Configuration object.

        Values are first set to default, then the scenario is applied,
        then the config file, then the kwargs.

        """
        self.mode = "state"
        self.plant = "two-mass-spring"
        self.gain = "zero"
        self.w_max = 1e-3
        self.u_max = 10.
        self.x_max = 10.
        self.y_max = 10.
        self.N = 50
        self.N_long = 5000
        self.seed = 0
        self.overbound_seeds = 1
        self.hankel_input_bound = None
        self.record_input_bound = None
        self.select_window = False
        self.L = 12
        self.Q = 1.
        self.R = 1.
        self.lambda_alpha = 100.
        self.lambda_sigma = 100.
        self.lambda_alpha_gamma = 1.
        self.lambda_sigma_gamma = 1.
        self.provenance = "data"
        self.rho_method = "power"
        self.sigma_cap = 1e6
        self.qp_backend = "admm"
        self.qp_tol = 1e-7
        self.qp_max_iter = 200000
        self.x0 = None
        self.xi0 = None
        self.warmup = None
        self.T_sim = 40
        self.sim_seed = 100
        self.n_seeds = 1
        self.settle_time = 28
        self.settle_level = 0.5

        self._default_values = dict(self.__dict__)

        # Main folder:
        if output_folder[-1] == "/":
            self.output_folder = output_folder
        else:
            self.output_folder = output_folder+"/"

        if scenario is not None:
            try:
                self.update(lib.scenarios.get_scenario(scenario))
            except KeyError as e:
                raise ConfigurationError(f"Unknown scenario {scenario}") from e
        if config_file is not None:
            self.update_config(config_file)

        # set given kwargs:
        self.update(kwargs)

    def update(self, values):
        """ Set options from a dict, unknown keys raise a ConfigurationError. """
        for key, value in values.items():
            if not key.startswith("_") and key in self._default_values:
                setattr(self, key, value)
            else:
                raise ConfigurationError(f"Unknown option {key}")

    def update_config(self, config_file):
        """
        Update the default cfg parameters with values from a toml config file.

        The options can be given in a [config] table or grouped in the
        tables [plant], [bounds], [data], [ocp] and [simulation]. In
        [plant], the keys A, B, C, D, a_coeffs and b_coeffs define
        the plant matrices, and name a built-in plant.

        Parameters
        ----------
        config_file : str
            Path to a toml config file.

        """
        try:
            content = toml.load(config_file)
        except toml.TomlDecodeError as e:
            raise ConfigurationError(f"Can not parse {config_file}: {e}") from e
        for section, values in content.items():
            if section not in CONFIG_SECTIONS or not isinstance(values, dict):
                raise ConfigurationError(
                    f"Unknown section {section} in config file, "
                    f"must be one of {CONFIG_SECTIONS}")
            values = dict(values)
            if section == "plant":
                matrices = {k: values.pop(k) for k in PLANT_KEYS if k in values}
                if matrices:
                    values["plant"] = matrices
                elif "name" in values:
                    values["plant"] = values.pop("name")
            try:
                self.update(values)
            except ConfigurationError as e:
                raise ConfigurationError(f"{e} in config file {config_file}") from e

    def get_plant(self):
        """
        The true plant: LtiPlant in state mode, DifferenceOperatorModel
        in output mode.

        """
        if isinstance(self.plant, dict) and "name" not in self.plant:
            table = self.plant
            if "a_coeffs" in table:
                return DifferenceOperatorModel(
                    [_matrix(a, "a_coeffs") for a in table["a_coeffs"]],
                    [_matrix(b, "b_coeffs") for b in table["b_coeffs"]],
                    _matrix(table.get("D", [[0.]]), "D"), name="custom")
            if "A" not in table or "B" not in table:
                raise ConfigurationError("plant: a plant table needs A and B")
            return LtiPlant(*(None if table.get(k) is None else _matrix(table[k], k)
                              for k in ("A", "B", "C", "D")), name="custom")
        try:
            return lib.plants.get_plant(self.plant)
        except KeyError as e:
            raise ConfigurationError(f"plant: {e}") from e

    def get_gain(self, plant):
        """ K of shape (m, n), or K_tilde of shape (m, n(m+p)) for models. """
        if isinstance(plant, DifferenceOperatorModel):
            shape = (plant.m, build_extended(plant).dim)
        else:
            shape = (plant.m, plant.n)
        if isinstance(self.gain, str) and self.gain == "zero":
            return np.zeros(shape)
        gain = _matrix(self.gain, "gain")
        if gain.size == shape[0] * shape[1] and gain.shape != shape:
            gain = gain.reshape(shape)
        if gain.shape != shape:
            raise ConfigurationError(f"gain: must have shape {shape}, got {gain.shape}")
        return gain

    def get_input_bound(self, which):
        """ Amplitude of the input of the 'hankel' dataset or the long 'record'. """
        bound = getattr(self, f"{which}_input_bound")
        return self.u_max if bound is None else float(bound)

    def get_x0(self, plant):
        return np.zeros(plant.n) if self.x0 is None else np.asarray(self.x0, dtype=float)

    def get_xi0(self, plant):
        return None if self.xi0 is None else np.asarray(self.xi0, dtype=float)

    def get_solver_kwargs(self):
        """ tol, max_iter and backend of the qp solver. """
        backend = QP_BACKENDS.get(self.qp_backend, self.qp_backend)
        return {"tol": self.qp_tol, "max_iter": self.qp_max_iter, "backend": backend}

    def validate(self, plant=None):
        """
        Check the options, raise a ConfigurationError naming the first
        invalid one.

        Parameters
        ----------
        plant : LtiPlant or DifferenceOperatorModel, optional
            Needed for the checks that depend on the dimensions.

        """
        choices = {
            "mode": ("state", "output"),
            "provenance": ("data", "oracle"),
            "rho_method": ("power", "multistep"),
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigurationError(f"{name}: must be one of {allowed}, got {getattr(self, name)}")
        if self.qp_backend not in QP_BACKENDS and self.qp_backend not in QP_BACKENDS.values():
            raise ConfigurationError(f"qp_backend: unknown backend {self.qp_backend}")

        bounds = ["u_max", "x_max"] if self.mode == "state" else ["u_max", "y_max"]
        for name in bounds + ["lambda_alpha", "lambda_sigma", "lambda_alpha_gamma",
                              "lambda_sigma_gamma", "sigma_cap", "qp_tol"]:
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name}: must be positive, got {getattr(self, name)}")
        if not self.w_max >= 0:
            raise ConfigurationError(f"w_max: must not be negative, got {self.w_max}")
        for name in ("hankel_input_bound", "record_input_bound"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigurationError(f"{name}: must be positive, got {value}")
        for name in ("N", "N_long", "L", "T_sim", "n_seeds", "overbound_seeds", "qp_max_iter"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigurationError(f"{name}: must be a positive integer, got {value}")
        if self.select_window and self.N_long < self.N:
            raise ConfigurationError(f"N_long: must be at least N={self.N} to select a window")

        if plant is None:
            return
        n, m = plant.n, plant.m
        if self.L < n:
            raise ConfigurationError(f"L: must be at least the system order n={n}, got {self.L}")
        if self.mode == "state":
            if not isinstance(plant, LtiPlant):
                raise ConfigurationError("plant: state mode needs a state space plant")
            needed = (m + 1) * (self.L + n + 1) - 1
            weight_dims = {"Q": n, "R": m}
        else:
            if not isinstance(plant, DifferenceOperatorModel):
                raise ConfigurationError("plant: output mode needs a difference operator model")
            needed = (m + 1) * (self.L + 2 * n) - 1
            weight_dims = {"Q": plant.p, "R": m}
        if self.N < needed:
            raise ConfigurationError(
                f"N: must be at least {needed} for persistency of excitation, got {self.N}")
        for name, dim in weight_dims.items():
            try:
                weight_matrix(getattr(self, name), name, dim, definite=(name == "R"))
            except ValueError as e:
                raise ConfigurationError(f"{name}: {e}") from e
        self.get_gain(plant)
        if self.mode == "state" and self.x0 is not None and np.size(self.x0) != n:
            raise ConfigurationError(f"x0: must have {n} entries, got {np.size(self.x0)}")


def _matrix(value, name):
    """ A matrix given inline as nested lists or as path to a csv file. """
    if isinstance(value, str):
        if not os.path.isfile(value):
            raise FileNotFoundError(f"{name}: no such matrix file {value}")
        return np.loadtxt(value, delimiter=",", ndmin=2)
    try:
        return np.atleast_2d(np.asarray(value, dtype=float))
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{name}: not a matrix ({e})") from e


def stream_seeds(seed, count):
    """ Independent integer seeds derived from one seed. """
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]
