# FILE: /backend/apps/simulations/config_parser.py
"""
Line-based run configuration.

    # comment
    scenario = efk_kink          (optional, top level)
    [problem]
    m = 1
    L = 20
    T = 10
    u0 = gaussian 0 1
    bc_left = 1
    [discretization]
    n = 64
    tau = 0.01
    [output]
    dir = results/fk
    svg = true

Unknown sections or keys, malformed values and missing required keys raise
ConfigParseError with the line number.
"""
import math
from dataclasses import dataclass, replace

from backend.apps.spectral.operators import Forcing, ProblemSpec
from backend.apps.spectral.profiles import Profile
from backend.core.exceptions import ConfigParseError, InvalidArgumentError

from .integrator import SCHEME_KINDS, SchemeSpec

DEFAULT_PLOT_POINTS = 201


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec = None
    n: int = None
    scheme: SchemeSpec = None
    panels: int = None
    gauss_points: int = None
    out_dir: str = None
    snapshot_every: int = 1
    svg: bool = False
    plot_points: int = DEFAULT_PLOT_POINTS
    scenario: str = None

    def with_overrides(self, n=None, tau=None, gamma=None, svg=None, out_dir=None):
        """Command-line overrides; tau keeps the snapshot times where possible."""
        config = self
        if n is not None:
            config = replace(config, n=n)
        if tau is not None and config.scheme is not None:
            ratio = config.scheme.tau / tau
            stride = config.snapshot_every
            if ratio > 1 and abs(ratio - round(ratio)) < 1e-9:
                stride = config.snapshot_every * int(round(ratio))
            config = replace(config, scheme=replace(config.scheme, tau=tau, store_every=stride), snapshot_every=stride)
        if gamma is not None and config.problem is not None and config.problem.m == 2:
            config = replace(config, problem=config.problem.with_changes(gamma=gamma))
        if svg is not None:
            config = replace(config, svg=svg)
        if out_dir is not None:
            config = replace(config, out_dir=str(out_dir))
        return config


SECTIONS = {
    'problem': ('m', 'gamma', 'beta', 'L', 'T', 'u0', 'bc_left', 'bc_right', 'forcing', 'reaction'),
    'discretization': ('n', 'scheme', 'tau', 'panels', 'gauss_points'),
    'output': ('dir', 'snapshot_every', 'svg', 'plot_points'),
}
REQUIRED = (('problem', 'm'), ('problem', 'L'), ('problem', 'T'), ('problem', 'u0'), ('discretization', 'n'))

# keys blamed for a ProblemSpec or SchemeSpec rejection, first present wins
ERROR_KEYS = {
    'invalid_beta': (('problem', 'beta'),),
    'degenerate_operator': (('problem', 'gamma'), ('problem', 'beta')),
    'unsupported_lifting': (('problem', 'bc_left'), ('problem', 'bc_right'), ('problem', 'forcing')),
    'outside_domain': (('problem', 'u0'),),
    'invalid_interval': (('problem', 'u0'),),
    'invalid_profile': (('problem', 'u0'),),
    'basis_required': (('problem', 'u0'),),
    'unsupported_profile': (('problem', 'forcing'),),
    'invalid_time_step': (('discretization', 'tau'),),
    'invalid_count': (('output', 'snapshot_every'),),
}


def error_line(code, lines, fallback):
    """Line of the key responsible for a validation error code."""
    for slot in ERROR_KEYS.get(code, ()):
        if slot in lines:
            return lines[slot]
    return fallback


class ValueReader:
    """Typed readers for single config values; each raises ConfigParseError with the line."""

    @staticmethod
    def number(text, line, key):
        try:
            value = float(text)
        except ValueError:
            raise ConfigParseError(f'{key}: malformed number {text!r}', line=line)
        if not math.isfinite(value):
            raise ConfigParseError(f'{key}: value must be finite, got {text!r}', line=line)
        return value

    @staticmethod
    def integer(text, line, key):
        try:
            return int(text)
        except ValueError:
            raise ConfigParseError(f'{key}: malformed integer {text!r}', line=line)

    @staticmethod
    def boolean(text, line, key):
        lowered = text.lower()
        if lowered not in ('true', 'false'):
            raise ConfigParseError(f'{key}: expected true or false, got {text!r}', line=line)
        return lowered == 'true'

    @staticmethod
    def profile(text, line, key):
        tokens = text.split()
        kind, args = tokens[0], tokens[1:]
        expected = {'gaussian': 2, 'poly_bump': 0, 'indicator': 2, 'sine_mode': 1}
        try:
            if kind in expected:
                if len(args) != expected[kind]:
                    raise ConfigParseError(
                        f'{key}: {kind} takes {expected[kind]} argument(s), got {len(args)}', line=line
                    )
                if kind == 'gaussian':
                    return Profile.gaussian(*(ValueReader.number(a, line, key) for a in args))
                if kind == 'poly_bump':
                    return Profile.poly_bump()
                if kind == 'indicator':
                    return Profile.indicator(*(ValueReader.number(a, line, key) for a in args))
                return Profile.sine_mode(ValueReader.integer(args[0], line, key))
            if kind == 'coefficients':
                return Profile.coefficients([ValueReader.number(a, line, key) for a in args])
            if kind == 'table':
                pairs = []
                for token in args:
                    if ':' not in token:
                        raise ConfigParseError(f'{key}: table entries look like x:value, got {token!r}', line=line)
                    x, v = token.split(':', 1)
                    pairs.append((ValueReader.number(x, line, key), ValueReader.number(v, line, key)))
                return Profile.table([p[0] for p in pairs], [p[1] for p in pairs])
        except ConfigParseError:
            raise
        except InvalidArgumentError as exc:
            raise ConfigParseError(f'{key}: {exc.detail}', line=line)
        raise ConfigParseError(f'{key}: unknown profile kind {kind!r}', line=line)

    @staticmethod
    def forcing(text, line, key):
        tokens = text.split()
        if tokens == ['zero']:
            return Forcing.zero()
        if tokens and tokens[0] == 'manufactured' and len(tokens) >= 3:
            rate = ValueReader.number(tokens[1], line, key)
            reference = ValueReader.profile(' '.join(tokens[2:]), line, key)
            try:
                return Forcing.manufactured(reference, rate)
            except InvalidArgumentError as exc:
                raise ConfigParseError(f'{key}: {exc.detail}', line=line)
        raise ConfigParseError(f'{key}: expected "zero" or "manufactured <rate> <profile>", got {text!r}', line=line)


def _tokenize(text):
    """Yield (line_number, section, key, value) for every assignment."""
    section = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.startswith('['):
            if not line.endswith(']'):
                raise ConfigParseError(f'malformed section header {raw.strip()!r}', line=number)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigParseError(f'unknown section [{section}]', line=number)
            continue
        if '=' not in line:
            raise ConfigParseError(f'expected "key = value", got {raw.strip()!r}', line=number)
        key, value = (part.strip() for part in line.split('=', 1))
        if not value:
            raise ConfigParseError(f'{key}: missing value', line=number)
        if section is None:
            if key != 'scenario':
                raise ConfigParseError(f'key {key!r} outside of any section', line=number)
        elif key not in SECTIONS[section]:
            raise ConfigParseError(f'unknown key {key!r} in [{section}]', line=number)
        yield number, section, key, value


def parse_config(text):
    """Parse configuration text into a RunConfig with defaults filled."""
    from .scenarios import SCENARIOS, base_config

    values, lines = {}, {}
    for number, section, key, raw in _tokenize(text):
        slot = (section, key)
        if slot in values:
            raise ConfigParseError(f'duplicate key {key!r}', line=number)
        values[slot], lines[slot] = raw, number
    end_line = max(len(text.splitlines()), 1)

    def read(section, key, reader, default=None):
        slot = (section, key)
        if slot not in values:
            return default
        return reader(values[slot], lines[slot], key)

    output = {
        'out_dir': read('output', 'dir', lambda v, line, key: v),
        'svg': read('output', 'svg', ValueReader.boolean, False),
        'plot_points': read('output', 'plot_points', ValueReader.integer, DEFAULT_PLOT_POINTS),
    }
    if output['plot_points'] < 2:
        raise ConfigParseError('plot_points must be at least 2', line=lines[('output', 'plot_points')])

    scenario = values.get((None, 'scenario'))
    if scenario is not None:
        if scenario not in SCENARIOS:
            raise ConfigParseError(
                f'unknown scenario {scenario!r}; available: {", ".join(sorted(SCENARIOS))}',
                line=lines[(None, 'scenario')],
            )
        config = base_config(scenario) or RunConfig()
        return replace(config, scenario=scenario, **{k: v for k, v in output.items() if v is not None})

    for section, key in REQUIRED:
        if (section, key) not in values:
            raise ConfigParseError(f'missing required key {key!r} in [{section}]', line=end_line)

    m = read('problem', 'm', ValueReader.integer)
    if m not in (1, 2):
        raise ConfigParseError(f'm must be 1 or 2, got {m}', line=lines[('problem', 'm')])
    gamma = read('problem', 'gamma', ValueReader.number, 1.0 if m == 2 else 0.0)
    if gamma < 0:
        raise ConfigParseError(f'gamma must be non-negative, got {gamma:g}', line=lines[('problem', 'gamma')])
    L = read('problem', 'L', ValueReader.number)
    if L <= 0:
        raise ConfigParseError(f'L must be positive, got {L:g}', line=lines[('problem', 'L')])
    T = read('problem', 'T', ValueReader.number)
    if T < 0:
        raise ConfigParseError(f'T must be non-negative, got {T:g}', line=lines[('problem', 'T')])

    n = read('discretization', 'n', ValueReader.integer)
    if n < 1:
        raise ConfigParseError(f'n must be at least 1, got {n}', line=lines[('discretization', 'n')])
    kind = read('discretization', 'scheme', lambda v, line, key: v, 'imex_euler')
    if kind not in SCHEME_KINDS:
        raise ConfigParseError(
            f'scheme must be one of {", ".join(SCHEME_KINDS)}, got {kind!r}',
            line=lines[('discretization', 'scheme')],
        )
    tau = read('discretization', 'tau', ValueReader.number, 1e-3)
    if tau <= 0:
        raise ConfigParseError(f'tau must be positive, got {tau:g}', line=lines[('discretization', 'tau')])
    snapshot_every = read('output', 'snapshot_every', ValueReader.integer, 1)
    if snapshot_every < 1:
        raise ConfigParseError('snapshot_every must be at least 1', line=lines[('output', 'snapshot_every')])

    try:
        problem = ProblemSpec(
            m=m,
            L=L,
            T=T,
            u0=read('problem', 'u0', ValueReader.profile),
            gamma=gamma,
            beta=read('problem', 'beta', ValueReader.number, 1.0),
            bc_left=read('problem', 'bc_left', ValueReader.number, 0.0),
            bc_right=read('problem', 'bc_right', ValueReader.number, 0.0),
            forcing=read('problem', 'forcing', ValueReader.forcing, Forcing.zero()),
            reaction=read('problem', 'reaction', ValueReader.boolean, True),
        )
        scheme = SchemeSpec(tau=tau, kind=kind, store_every=snapshot_every)
    except ConfigParseError:
        raise
    except InvalidArgumentError as exc:
        raise ConfigParseError(exc.detail, line=error_line(exc.code, lines, end_line))

    return RunConfig(
        problem=problem,
        n=n,
        scheme=scheme,
        panels=read('discretization', 'panels', ValueReader.integer),
        gauss_points=read('discretization', 'gauss_points', ValueReader.integer),
        snapshot_every=snapshot_every,
        **output,
    )
