#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Utility code regarding the files in the output folder.
"""

import os
import numpy as np
import toml

from robustdd.plant import DataSet


def get_subfolder(main_folder, name=None, create=False):
    """
    Get the path to one or all subfolders of the main folder.

    Parameters
    ----------
    main_folder : str
        The main folder.
    name : str or None
        The name of the subfolder.
    create : bool
        If the subfolder should be created if it does not exist.

    Returns
    -------
    subfolder : str or list
        The path of the subfolder. If name is None, all subfolders
        will be returned as a list.

    """
    if not main_folder[-1] == "/":
        main_folder += "/"

    subfolders = {
        "data": main_folder + "data",
        "hankel": main_folder + "data/hankel",
        "record": main_folder + "data/constants",
        "constants": main_folder + "constants",
        "coefficients": main_folder + "coefficients",
        "runs": main_folder + "runs",
        "plots": main_folder + "plots",
    }

    def get(fdr):
        subfdr = subfolders[fdr]
        if create and not os.path.exists(subfdr):
            print("Creating directory: " + subfdr)
            os.makedirs(subfdr)
        return subfdr

    if name is None:
        subfolder = [get(name) for name in subfolders]
    else:
        subfolder = get(name)
    return subfolder


def save_sequence(file, z, prefix):
    """ Save a sequence of shape (N, dim) as csv with header prefix0, prefix1, ... """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    header = ",".join(f"{prefix}{i}" for i in range(z.shape[1]))
    np.savetxt(file, z, delimiter=",", fmt="%.17g", header=header, comments="")


def load_sequence(file):
    """ Load a sequence saved with save_sequence, shape (N, dim). """
    if not os.path.isfile(file):
        raise FileNotFoundError(f"No such sequence file: {file}")
    return np.genfromtxt(file, delimiter=",", skip_header=1, ndmin=2)


def save_dataset(data, folder):
    """
    Save a DataSet as a directory.

    nu.csv, state.csv or output.csv, optional disturbance.csv and
    input.csv, and the scalar info in meta.toml.

    """
    os.makedirs(folder, exist_ok=True)
    save_sequence(os.path.join(folder, "nu.csv"), data.nu, "u")
    if data.kind == "state":
        save_sequence(os.path.join(folder, "state.csv"), data.state, "x")
    else:
        save_sequence(os.path.join(folder, "output.csv"), data.output, "y")
    if data.disturbance is not None:
        save_sequence(os.path.join(folder, "disturbance.csv"), data.disturbance, "w")
    if data.inputs is not None:
        save_sequence(os.path.join(folder, "input.csv"), data.inputs, "u")

    meta = {
        "kind": data.kind,
        "length": data.length,
        "m": data.nu.shape[1],
        "w_max": data.w_max,
    }
    if data.gain is not None:
        meta["gain"] = data.gain.tolist()
    if data.seed is not None:
        meta["seed"] = int(data.seed)
    if data.order is not None:
        meta["order"] = int(data.order)
    with open(os.path.join(folder, "meta.toml"), "w") as f:
        toml.dump(meta, f)


def load_dataset(folder):
    """ Load a DataSet saved with save_dataset. """
    meta_file = os.path.join(folder, "meta.toml")
    if not os.path.isfile(meta_file):
        raise FileNotFoundError(f"No dataset found in {folder}, run collect first")
    meta = toml.load(meta_file)

    def optional(name):
        file = os.path.join(folder, name)
        return load_sequence(file) if os.path.isfile(file) else None

    signal = {meta["kind"]: load_sequence(os.path.join(folder, f"{meta['kind']}.csv"))}
    return DataSet(load_sequence(os.path.join(folder, "nu.csv")),
                   gain=meta.get("gain"), disturbance=optional("disturbance.csv"),
                   w_max=meta["w_max"], inputs=optional("input.csv"),
                   order=meta.get("order"), seed=meta.get("seed"), **signal)


class IOHandler(object):
    """
    Access info indirectly contained in the cfg object.
    """
    def __init__(self, cfg):
        self.cfg = cfg

    def get_subfolder(self, name=None, create=False):
        """ Get the path to a subfolder of the output folder. """
        return get_subfolder(self.cfg.output_folder, name, create)

    def get_dataset_folder(self, which, create=False):
        """ Folder of the 'hankel' dataset (length N) or the 'record' (length N'). """
        if which not in ("hankel", "record"):
            raise NameError(f"Unknown dataset {which}")
        return self.get_subfolder(which, create)

    def load_datasets(self):
        """ The hankel dataset and the long record. """
        return (load_dataset(self.get_dataset_folder("hankel")),
                load_dataset(self.get_dataset_folder("record")))

    def get_constants_path(self, provenance):
        return os.path.join(self.get_subfolder("constants"), f"constants_{provenance}.toml")

    def get_coefficients_path(self, provenance):
        return os.path.join(self.get_subfolder("coefficients"), f"coefficients_{provenance}.csv")

    def get_run_folder(self, seed, create=False):
        folder = os.path.join(self.get_subfolder("runs", create), f"seed_{seed}")
        if create:
            os.makedirs(folder, exist_ok=True)
        return folder

    def get_plot_path(self, name, create=False):
        return os.path.join(self.get_subfolder("plots", create), name)

    def print_log(self, lines, logging=True):
        """ Print and also log to the full log file. """
        if isinstance(lines, str):
            lines = [lines, ]

        if not logging:
            for line in lines:
                print(line)
        else:
            os.makedirs(self.cfg.output_folder, exist_ok=True)
            full_log_file = self.cfg.output_folder + 'log.txt'
            with open(full_log_file, 'a+') as f_out:
                for line in lines:
                    f_out.write(line + "\n")
                    print(line)
