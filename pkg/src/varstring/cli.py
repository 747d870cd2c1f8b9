#!/usr/bin/env python3
"""
varstring command line.

Subcommands wire the engines into reproducible runs:

    varstring spectrum --density quartic --n 200
    varstring asymptotics --density horgan --a 1 --accelerate
    varstring reproduce --table t6
    varstring compare --density cosine --param amplitude=0.3 --count 10

Exit codes: 0 success, 2 configuration error, 3 engine error, 4 when a
reproduction has failing cells.
"""

import argparse
import json
import sys
import time
from contextlib import contextmanager
from typing import Any, Dict, List, Optional, Sequence

from .asymptotics import coefficients_from_spectrum, formula_coefficients, gamma_terms
from .collocation import (
    LsfGrid,
    fourier_coefficients,
    localized_modes,
    lsf_solve,
    spectral_gaps,
)
from .config import (
    DEFAULT_WINDOW,
    FIT_CENTERS,
    FIT_COEFFICIENTS,
    FIT_HALF_WIDTH,
    FIT_KEEP,
    LSF_DEFAULT_POINTS,
    OUTPUT_FORMATS,
    RunConfig,
    load_config,
    merge_config,
)
from .density import DensityModel, catalog_model, from_csv
from .errors import ConfigError, VarStringError
from .iterative import (
    TrialDensitySpec,
    block_seeds,
    optimize_trial_density,
    theorem1_iterate,
    theorem2_block,
    theorem3_spectrum,
)
from .logging_config import configure_logging, get_logger
from .perturbation import (
    dpt_energy,
    dpt_variational_bound,
    wkbpt_energy,
    wkbpt_first_order_bound,
)
from .report import (
    EngineReport,
    build_metadata,
    emit,
    modes_document,
    report_document,
    write_csv,
)
from .reproduce import reproduce
from .reference import TABLE_IDS
from .spectral import SpectralConfig, horgan_exact, solve_dense, solve_windowed, windowed_energies
from .wkb_basis import WkbBasis, build_table

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENGINE = 3
EXIT_REPRODUCTION = 4

JSON_COMMANDS = ("bound", "asymptotics")
SHORTHAND_PARAMS = ("a", "rho0", "L", "epsilon", "alpha")
DEFAULT_COMPARE_MODES = 10
DEFAULT_BOUND_SIZE = 50
HORGAN_FIT_MODES = 1000
HORGAN_FIT_N_MIN = 20


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors become ConfigError."""

    def error(self, message):
        raise ConfigError(message)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='JSON configuration file')
    common.add_argument('--density', type=str, help='Catalog density name (default: quartic)')
    common.add_argument('--param', action='append', default=[], metavar='KEY=VALUE',
                        help='Density parameter, may be repeated')
    for name in SHORTHAND_PARAMS:
        common.add_argument(f'--{name}', type=float, dest=f'param_{name}',
                            help=f'Shorthand for --param {name}=VALUE')
    common.add_argument('--density-csv', type=str, dest='density_csv',
                        help='CSV file of (x, rho) rows instead of a catalog density')
    common.add_argument('--tol', type=float, help='Matrix-element tolerance')
    common.add_argument('--output', '-o', type=str, help='Output file (default: stdout)')
    common.add_argument('--format', '-f', choices=OUTPUT_FORMATS, help='Output format')
    common.add_argument('--timings', action='store_true',
                        help='Record wall-clock timings in the output metadata')
    common.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(description='Eigenvalues of inhomogeneous strings')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('spectrum', parents=[common], help='Dense or windowed Galerkin solve')
    p.add_argument('--n', type=int, help='Basis size N (default: 200)')
    p.add_argument('--center', type=int, help='Window centre c')
    p.add_argument('--half-width', type=int, dest='half_width', help='Window half-width')
    p.add_argument('--dump-vectors', type=str, dest='dump_vectors',
                   help='CSV file for the eigenvector coefficients')

    p = sub.add_parser('collocate', parents=[common], help='Little-Sinc-Function collocation')
    p.add_argument('--n', type=int, help=f'Grid size N (default: {LSF_DEFAULT_POINTS})')
    p.add_argument('--count', type=int, help='Number of modes (default: 10)')
    p.add_argument('--dump-nodes', type=str, dest='dump_nodes',
                   help='CSV file for the mode values at the grid nodes')
    p.add_argument('--fourier', type=str, help='CSV file for the Fourier coefficients')

    p = sub.add_parser('iterate', parents=[common], help='Iterative refinement theorems')
    p.add_argument('--theorem', type=int, choices=(1, 2, 3), help='Theorem 1, 2 or 3')
    p.add_argument('--steps', type=int, help='Number of iterations')
    p.add_argument('--count', type=int, help='Modes for theorems 2 and 3')
    p.add_argument('--dump-mode', type=str, dest='dump_mode',
                   help='CSV file for the final iterate at the grid nodes')

    p = sub.add_parser('bound', parents=[common], help='Variational upper bound on E_1')
    p.add_argument('--engine', choices=('dpt', 'wkbpt', 'iwkbpt', 'gottlieb'))
    p.add_argument('--order', type=int, help='Polynomial order of the trial density')
    p.add_argument('--size', type=int, help='States in the first-order WKBPT ansatz')
    p.add_argument('--seed', type=int, help='Seed of the optimizer restarts')

    p = sub.add_parser('asymptotics', parents=[common], help='A1, A2 and A3')
    p.add_argument('--terms', type=int, help='Terms of the gamma series')
    p.add_argument('--accelerate', action='store_true', default=None,
                   help='Add the analytic tail of the gamma series')
    p.add_argument('--fit', action='store_true', help='Fit the coefficients from a spectrum')
    p.add_argument('--dump-gamma', type=str, dest='dump_gamma',
                   help='CSV file for the (k, gamma_k) pairs')

    p = sub.add_parser('reproduce', parents=[common], help='Reproduce a published table')
    p.add_argument('--table', choices=TABLE_IDS, help='Table id')
    p.add_argument('--count', type=int, help='Largest N for t4/t5, exact modes for fit')

    p = sub.add_parser('compare', parents=[common], help='Cross-engine comparison')
    p.add_argument('--count', type=int, help=f'Modes 1..m (default: {DEFAULT_COMPARE_MODES})')
    p.add_argument('--size', type=int, help='Dense basis size (default: 200)')
    p.add_argument('--n', type=int, help=f'LSF grid size (default: {LSF_DEFAULT_POINTS})')
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    return build_parser().parse_args(argv)


def _parse_params(pairs: Sequence[str]) -> Dict[str, float]:
    params: Dict[str, float] = {}
    for pair in pairs:
        key, sep, value = pair.partition('=')
        if not sep or not key:
            raise ConfigError(f"--param expects KEY=VALUE, got {pair!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param {key}: not a number: {value!r}")
    return params


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge the config file (if any) with the explicit flags."""
    file_values = load_config(args.config) if args.config else {}
    params = _parse_params(args.param)
    for name in SHORTHAND_PARAMS:
        value = getattr(args, f'param_{name}')
        if value is not None:
            params[name] = value
    flags: Dict[str, Any] = {'command': args.command, 'density_params': params or None}
    for key in ('density', 'density_csv', 'tol', 'output', 'format', 'n', 'size', 'order',
                'center', 'half_width', 'steps', 'count', 'theorem', 'engine', 'terms',
                'accelerate', 'table', 'seed'):
        flags[key] = getattr(args, key, None)
    if flags['format'] is None and 'format' not in file_values:
        flags['format'] = 'json' if args.command in JSON_COMMANDS else 'csv'
    return merge_config(file_values, flags)


def build_density(cfg: RunConfig) -> DensityModel:
    if cfg.density_csv:
        return from_csv(cfg.density_csv)
    return catalog_model(cfg.density, **cfg.density_params)


class Timer:
    """Wall-clock timings per phase, reported only on request."""

    def __init__(self):
        self.timings: Dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = time.perf_counter() - start
            logger.info("%s finished in %.3f s", name, self.timings[name])


def _write_side_table(path: str, columns: List[str], rows: List[Dict[str, Any]],
                      metadata: Dict[str, Any]) -> None:
    try:
        with open(path, 'w', encoding='utf-8', newline='') as fh:
            write_csv(rows, columns, fh, metadata)
    except OSError as exc:
        raise ConfigError(f"Cannot write {path}: {exc}")


def run_spectrum(cfg: RunConfig, args, timer: Timer, meta) -> Dict[str, Any]:
    model = build_density(cfg)
    size = cfg.n or cfg.size
    with timer.phase('spectrum'):
        if cfg.center is not None:
            modes = solve_windowed(model, SpectralConfig(center=cfg.center,
                                                         half_width=cfg.half_width, tol=cfg.tol))
        else:
            spectral_cfg = SpectralConfig(tol=cfg.tol) if size is None else \
                SpectralConfig(size=size, tol=cfg.tol)
            modes = solve_dense(model, spectral_cfg)
    if args.dump_vectors:
        length = len(modes[0].coefficients)
        first = modes[0].extra.get('first', 1)
        columns = ['index'] + [f'mode_{m.n}' for m in modes]
        rows = [dict({'index': first + i}, **{f'mode_{m.n}': float(m.coefficients[i])
                                              for m in modes})
                for i in range(length)]
        _write_side_table(args.dump_vectors, columns, rows, meta)
    return modes_document(modes)


def run_collocate(cfg: RunConfig, args, timer: Timer, meta) -> Dict[str, Any]:
    model = build_density(cfg)
    points = cfg.n or LSF_DEFAULT_POINTS
    count = cfg.count or 10
    with timer.phase('collocate'):
        modes = lsf_solve(model, points, count)
    grid = LsfGrid(model.half_length, points)
    document = modes_document(modes)
    document['localized'] = localized_modes(modes, grid)
    if count >= 3:
        document['gaps'] = spectral_gaps([m.energy for m in modes])
    if args.dump_nodes:
        columns = ['x'] + [f'mode_{m.n}' for m in modes]
        rows = [dict({'x': float(x)}, **{f'mode_{m.n}': float(m.node_values[i]) for m in modes})
                for i, x in enumerate(grid.nodes)]
        _write_side_table(args.dump_nodes, columns, rows, meta)
    if args.fourier:
        decompositions = [fourier_coefficients(m, grid) for m in modes]
        columns = ['k'] + [f'mode_{d.n}' for d in decompositions]
        rows = [dict({'k': k + 1}, **{f'mode_{d.n}': float(d.coefficients[k])
                                      for d in decompositions})
                for k in range(grid.size)]
        _write_side_table(args.fourier, columns, rows, meta)
    return document


def run_iterate(cfg: RunConfig, args, timer: Timer, meta) -> Dict[str, Any]:
    model = build_density(cfg)
    with timer.phase(f'theorem{cfg.theorem}'):
        if cfg.theorem == 1:
            state = theorem1_iterate(model, steps=cfg.steps)
            states = [state]
            rows = [{'step': i, 'bound': b} for i, b in enumerate(state.bounds)]
            columns = ['step', 'bound']
        elif cfg.theorem == 2:
            count = cfg.count or 3
            states = theorem2_block(model, block_seeds(model, count), cfg.steps)
            rows = [{'step': i, 'mode': j, 'bound': b}
                    for j, st in enumerate(states, 1) for i, b in enumerate(st.bounds)]
            columns = ['step', 'mode', 'bound']
        else:
            modes = theorem3_spectrum(model, cfg.count or 10, cfg.steps)
            rows = [{'n': m.n, 'lprime': m.extra['Lprime'], 'energy': m.energy} for m in modes]
            if args.dump_mode:
                _dump_iterates(args.dump_mode, [m.grid_function for m in modes], meta)
            return {'columns': ['n', 'lprime', 'energy'], 'rows': rows}
    if args.dump_mode:
        _dump_iterates(args.dump_mode, [st.iterate for st in states], meta)
    return {'columns': columns, 'rows': rows}


def _dump_iterates(path: str, functions, meta) -> None:
    nodes = functions[0].nodes
    columns = ['x'] + [f'mode_{j}' for j in range(1, len(functions) + 1)]
    rows = [dict({'x': float(x)}, **{f'mode_{j}': float(gf.values[i])
                                     for j, gf in enumerate(functions, 1)})
            for i, x in enumerate(nodes)]
    _write_side_table(path, columns, rows, meta)


def run_bound(cfg: RunConfig, args, timer: Timer, meta) -> Dict[str, Any]:
    model = build_density(cfg)
    engine = cfg.engine
    with timer.phase(f'bound-{engine}'):
        if engine == 'dpt':
            return {'bound': dpt_variational_bound(model), 'parameters': {},
                    'asym_factor': None}
        if engine == 'wkbpt':
            size = cfg.size or DEFAULT_BOUND_SIZE
            table = build_table(WkbBasis(model, size=size), size, tol=cfg.tol)
            return {'bound': wkbpt_first_order_bound(table, size),
                    'parameters': {'size': size}, 'asym_factor': 1.0}
        if engine in ('iwkbpt', 'gottlieb'):
            opt = optimize_trial_density(model, TrialDensitySpec('polynomial', order=cfg.order),
                                         use_gottlieb=engine == 'gottlieb', seed=cfg.seed)
            params = {'coefficients': [1.0] + [float(p) for p in opt.parameters]}
            if opt.alpha is not None:
                params['alpha'] = opt.alpha
            return {'bound': opt.bound, 'parameters': params, 'asym_factor': opt.asym_factor,
                    'converged': opt.converged}
    raise ConfigError(f"Unknown bound engine {engine!r}")


def _spectrum_fit(model: DensityModel, cfg: RunConfig):
    if model.name == 'horgan':
        spectrum = horgan_exact(model.parameters['a'], HORGAN_FIT_MODES)
        return coefficients_from_spectrum(spectrum.pairs(), HORGAN_FIT_N_MIN, FIT_COEFFICIENTS)
    pairs = windowed_energies(model, FIT_CENTERS, FIT_HALF_WIDTH, FIT_KEEP, cfg.tol)
    return coefficients_from_spectrum(pairs, 1, FIT_COEFFICIENTS)


def run_asymptotics(cfg: RunConfig, args, timer: Timer, meta) -> Dict[str, Any]:
    model = build_density(cfg)
    with timer.phase('asymptotics'):
        if args.fit:
            coeffs = _spectrum_fit(model, cfg)
        else:
            coeffs = formula_coefficients(model, cfg.terms, cfg.accelerate)
    if args.dump_gamma:
        k, gamma = gamma_terms(model, cfg.terms)
        rows = [{'k': int(kk), 'gamma': float(g)} for kk, g in zip(k, gamma)]
        _write_side_table(args.dump_gamma, ['k', 'gamma'], rows, meta)
    return coeffs.as_dict()


def run_reproduce(cfg: RunConfig, args, timer: Timer, meta) -> Dict[str, Any]:
    if not cfg.table:
        raise ConfigError("reproduce needs --table")
    with timer.phase(f'reproduce-{cfg.table}'):
        report = reproduce(cfg.table, cfg.count)
    document = {'columns': ['table', 'row', 'column', 'value', 'reference', 'deviation',
                            'tolerance', 'status'],
                'rows': report.rows()}
    document.update(report.summary())
    return document


def run_compare(cfg: RunConfig, args, timer: Timer, meta) -> Dict[str, Any]:
    model = build_density(cfg)
    count = cfg.count or DEFAULT_COMPARE_MODES
    report = EngineReport()
    with timer.phase('spectral'):
        size = cfg.size or max(SpectralConfig().size, 2 * count)
        report.add('spectral', solve_dense(model, SpectralConfig(size=size, tol=cfg.tol))[:count])
    with timer.phase('lsf'):
        report.add('lsf', lsf_solve(model, cfg.n or LSF_DEFAULT_POINTS, count))
    with timer.phase('wkbpt2'):
        basis = WkbBasis(model, size=count + DEFAULT_WINDOW)
        table = build_table(basis, count + DEFAULT_WINDOW, tol=cfg.tol)
        report.add_pairs('wkbpt2', [(n, wkbpt_energy(basis, table, n, 2, DEFAULT_WINDOW).energy)
                                    for n in range(1, count + 1)])
    with timer.phase('dpt2'):
        report.add_pairs('dpt2', [(n, dpt_energy(model, n, 2, tol=cfg.tol).energy)
                                  for n in range(1, count + 1)])
    return report_document(report)


RUNNERS = {
    'spectrum': run_spectrum,
    'collocate': run_collocate,
    'iterate': run_iterate,
    'bound': run_bound,
    'asymptotics': run_asymptotics,
    'reproduce': run_reproduce,
    'compare': run_compare,
}


def _report_error(exc: Exception) -> None:
    sys.stderr.write(json.dumps({'error': type(exc).__name__, 'message': str(exc)}) + '\n')


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    try:
        args = parse_args(argv)
        if args.verbose:
            configure_logging('DEBUG')
        cfg = config_from_args(args)
    except ConfigError as exc:
        _report_error(exc)
        return EXIT_CONFIG

    timer = Timer()
    meta = build_metadata(cfg.echo())
    try:
        document = RUNNERS[cfg.command](cfg, args, timer, meta)
        if args.timings:
            meta = build_metadata(cfg.echo(), timer.timings)
        emit(document, cfg.output, cfg.format, meta)
    except ConfigError as exc:
        _report_error(exc)
        return EXIT_CONFIG
    except VarStringError as exc:
        logger.error("%s failed: %s", cfg.command, exc)
        _report_error(exc)
        return EXIT_ENGINE

    if cfg.command == 'reproduce' and document.get('status') != 'PASS':
        return EXIT_REPRODUCTION
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
