# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""rekey command line.

  rekey rotate --url=U --vault=F [--purls=F] [--journal=F] [--max-pages 20]
  rekey find-reset --url=U [--username=X --password=Y]
  rekey genpw [--length=12]
  rekey vault list|add|remove --vault=F [--url=U --username=X --password=Y]
  rekey purls merge --local=F --remote=F [--out=F]
  rekey sim gen --category=C --seed=N [--out=F]
  rekey sim corpus --out=DIR [--count=30 --seed=0 --categories=...]
  rekey sim serve --spec=F [--port=P]
  rekey bench --corpus=DIR --report=F [--jobs=N]
  rekey version

Exit status is 0 on success, 2 on a usage error and 1 on an operational
failure, which also prints an `outcome=<Variant>` line. Credentials not in
the vault fall back to $REKEY_USERNAME and $REKEY_PASSWORD.
"""

from collections.abc import Callable, Sequence
import collections
import os
import pathlib
import sys

from absl import app
from absl import flags
from absl import logging

from rekey import bench
from rekey import config
from rekey import navigator
from rekey import passgen
from rekey import priority
from rekey import purls
from rekey import urls
from rekey import vault
from rekey import version
from rekey import webclient
from rekey.sim import server
from rekey.sim import site_spec

FLAGS = flags.FLAGS

USERNAME_ENV = 'REKEY_USERNAME'
PASSWORD_ENV = 'REKEY_PASSWORD'

# Site and stores.
_URL = flags.DEFINE_string('url', None, 'Login page URL of the site.')
_VAULT = flags.DEFINE_string('vault', None, 'Path to the vault JSON file.')
_PURLS = flags.DEFINE_string('purls', None, 'Path to the purls.txt cache.')
_JOURNAL = flags.DEFINE_string(
    'journal',
    None,
    'Recovery journal for unconfirmed resets. Defaults to <vault>.journal.',
)
_USERNAME = flags.DEFINE_string(
    'username', None, f'Account username; falls back to ${USERNAME_ENV}.')
_PASSWORD = flags.DEFINE_string(
    'password', None, f'Account password; falls back to ${PASSWORD_ENV}.')

# Search and generation.
_MAX_PAGES = flags.DEFINE_integer(
    'max_pages',
    config.max_pages,
    'Pages the reset-page search may open.',
    lower_bound=1,
)
flags.DEFINE_alias('max-pages', 'max_pages')
_PRIORITY_TABLE = flags.DEFINE_string(
    'priority_table',
    None,
    'Optional pattern<TAB>priority file replacing the built-in table.',
)
_LENGTH = flags.DEFINE_integer(
    'length', config.password_length, 'Generated password length.',
    lower_bound=1)

# purls merge.
_LOCAL = flags.DEFINE_string('local', None, 'Local purls file.')
_REMOTE = flags.DEFINE_string('remote', None, 'Remote purls file.')
_OUT = flags.DEFINE_string(
    'out', None, 'Output file, or output directory for `sim corpus`.')

# Simulator.
_CATEGORY = flags.DEFINE_enum(
    'category', 'simple', site_spec.CATEGORIES, 'Simulated site category.')
_CATEGORIES = flags.DEFINE_list(
    'categories', list(site_spec.CATEGORIES), 'Categories for `sim corpus`.')
_SEED = flags.DEFINE_integer('seed', 0, 'Generation seed (first seed for '
                             '`sim corpus`).')
_COUNT = flags.DEFINE_integer(
    'count', 30, 'Sites per category for `sim corpus`.', lower_bound=1)
_DEPTH = flags.DEFINE_integer(
    'depth', site_spec.SiteParams().depth, 'Reset page depth of complex sites.')
_DECOYS = flags.DEFINE_integer(
    'decoys', site_spec.SiteParams().decoys, 'Decoy pages of complex sites.')
_NOISE = flags.DEFINE_float(
    'noise', site_spec.SiteParams().noise,
    'Probability that a decoy link matches a priority pattern.')
_SPEC = flags.DEFINE_string('spec', None, 'SiteSpec JSON file to serve.')
_PORT = flags.DEFINE_integer('port', 0, 'Port to serve on; 0 picks one.',
                             lower_bound=0)

# Bench.
_CORPUS = flags.DEFINE_string('corpus', None, 'Directory of SiteSpec files.')
_REPORT = flags.DEFINE_string('report', None, 'CSV report path.')
_JOBS = flags.DEFINE_integer('jobs', 1, 'Sites rotated in parallel.',
                             lower_bound=1)

# Failures reported as exit status 1 with an `outcome=` line.
_OPERATIONAL_ERRORS = (
    vault.VaultError,
    purls.CorruptPurls,
    priority.PriorityTableError,
    webclient.NetworkError,
    passgen.EntropySourceUnavailable,
    server.BindFailure,
    OSError,
)


class UsageError(Exception):
    """Bad command line; exit status 2."""


def _require(flag: flags.FlagHolder) -> str:
    if flag.value is None:
        raise UsageError(f'--{flag.name} is required')
    return flag.value


def _site_url() -> str:
    url = _require(_URL)
    if not urls.is_absolute(url):
        raise UsageError(f'--url must be an absolute http(s) URL, got {url!r}')
    return url


def _no_more(args: Sequence[str]) -> None:
    if args:
        raise UsageError(f'Unexpected arguments: {" ".join(args)}')


def _outcome(name: str) -> int:
    print(f'outcome={name}')
    return 1


def _table() -> priority.PriorityTable:
    if _PRIORITY_TABLE.value is None:
        return priority.default_table()
    return priority.load_table(_PRIORITY_TABLE.value)


def _flag_or_env(flag: flags.FlagHolder, env: str) -> str | None:
    return flag.value or os.environ.get(env) or None


def _credentials(
    url: str, vault_db: vault.Vault | None
) -> navigator.Credentials:
    username = _flag_or_env(_USERNAME, USERNAME_ENV)
    if vault_db is not None:
        record = vault.find(vault_db, url, username)
        if record is not None:
            return navigator.Credentials(record.username, record.password)
    password = _flag_or_env(_PASSWORD, PASSWORD_ENV)
    if not username or not password:
        raise UsageError(
            f'No credentials for {url}: add them to the vault, pass '
            f'--username/--password or set ${USERNAME_ENV}/${PASSWORD_ENV}')
    return navigator.Credentials(username, password)


def _rotate(args: Sequence[str]) -> int:
    _no_more(args)
    url = _site_url()
    vault_path = pathlib.Path(_require(_VAULT))
    vault_db = vault.load(vault_path)
    purls_map = purls.load(_PURLS.value) if _PURLS.value else purls.PurlsMap()
    creds = _credentials(url, vault_db)
    paths = navigator.StorePaths.beside_vault(vault_path, _PURLS.value,
                                              _JOURNAL.value)
    session = navigator.rotate(url, creds, vault_db, purls_map,
                               max_pages=_MAX_PAGES.value, table=_table(),
                               paths=paths, length=_LENGTH.value)
    outcome = session.outcome
    print(f'pages_opened={session.opened_count}')
    if outcome.reset_url:
        print(f'reset_url={outcome.reset_url}')
    if outcome.kind == navigator.OutcomeKind.RESET_CONFIRMED:
        print(f'outcome={outcome.name}')
        return 0
    if outcome.kind == navigator.OutcomeKind.RESET_AMBIGUOUS:
        print(f'journal={paths.journal}', file=sys.stderr)
    return _outcome(outcome.name)


def _find_reset(args: Sequence[str]) -> int:
    _no_more(args)
    url = _site_url()
    vault_db = vault.load(_VAULT.value) if _VAULT.value else None
    session = navigator.find_reset_page(
        url, _credentials(url, vault_db), max_pages=_MAX_PAGES.value,
        table=_table())
    print(f'pages_opened={session.opened_count}')
    if session.reset_page is None:
        return _outcome(session.outcome.name)
    print(f'reset_url={session.reset_page.final_url}')
    return 0


def _genpw(args: Sequence[str]) -> int:
    _no_more(args)
    print(passgen.generate_password(length=_LENGTH.value).value)
    return 0


def _vault(args: Sequence[str]) -> int:
    if len(args) != 1 or args[0] not in ('list', 'add', 'remove'):
        raise UsageError('usage: rekey vault list|add|remove --vault=F')
    vault_path = _require(_VAULT)
    vault_db = vault.load(vault_path)
    match args[0]:
        case 'list':
            for record in vault_db:
                print(f'{record.origin}\t{record.username}\t'
                      f'{record.updated_at.isoformat()}')
        case 'add':
            url = _site_url()
            username = _flag_or_env(_USERNAME, USERNAME_ENV)
            password = _flag_or_env(_PASSWORD, PASSWORD_ENV)
            if not username or not password:
                raise UsageError('vault add needs a username and a password')
            record = vault.upsert(vault_db, vault.CredentialRecord(
                origin=url, username=username, password=password))
            vault.save(vault_db, vault_path)
            print(f'added {record.origin}\t{record.username}')
        case 'remove':
            url = _site_url()
            username = _require(_USERNAME)
            if not vault.remove(vault_db, url, username):
                return _outcome('NotFound')
            vault.save(vault_db, vault_path)
            print(f'removed {urls.normalize_origin(url)}\t{username}')
    return 0


def _purls(args: Sequence[str]) -> int:
    if list(args) != ['merge']:
        raise UsageError('usage: rekey purls merge --local=F --remote=F')
    local_path = _require(_LOCAL)
    remote = purls.load(_require(_REMOTE))
    merged = purls.merge(purls.load(local_path), remote)
    out = _OUT.value or local_path
    purls.save(merged, out)
    print(f'{len(merged)} entries written to {out}')
    return 0


def _site_params() -> site_spec.SiteParams:
    return site_spec.SiteParams(depth=_DEPTH.value, decoys=_DECOYS.value,
                                noise=_NOISE.value)


def _sim(args: Sequence[str]) -> int:
    if len(args) != 1 or args[0] not in ('gen', 'corpus', 'serve'):
        raise UsageError('usage: rekey sim gen|corpus|serve')
    try:
        params = _site_params()
        params.validate()
    except site_spec.InvalidParams as e:
        raise UsageError(str(e)) from e
    match args[0]:
        case 'gen':
            spec = site_spec.gen_site(_CATEGORY.value, params, _SEED.value)
            if _OUT.value:
                pathlib.Path(_OUT.value).write_text(spec.to_json(),
                                                    encoding='utf-8')
            else:
                sys.stdout.write(spec.to_json())
        case 'corpus':
            unknown = set(_CATEGORIES.value) - set(site_spec.CATEGORIES)
            if unknown:
                raise UsageError(f'Unknown categories: {sorted(unknown)}')
            written = site_spec.gen_corpus(
                _require(_OUT), _CATEGORIES.value, _COUNT.value, _SEED.value,
                params)
            print(f'{len(written)} sites written to {_OUT.value}')
        case 'serve':
            spec = site_spec.load_site(_require(_SPEC))
            site = server.serve_site(spec, _PORT.value)
            print(f'url={site.entry_url}')
            print(f'username={spec.account.username}')
            print(f'password={spec.account.password}', flush=True)
            try:
                site.wait()
            except KeyboardInterrupt:
                site.shutdown()
    return 0


def _bench(args: Sequence[str]) -> int:
    _no_more(args)
    try:
        rows = bench.run_bench(_require(_CORPUS), _require(_REPORT),
                               jobs=_JOBS.value, max_pages=_MAX_PAGES.value)
    except ValueError as e:
        raise UsageError(str(e)) from e
    tally = collections.Counter((row.category, row.outcome) for row in rows)
    for (category, outcome), n in sorted(tally.items()):
        print(f'{category}\t{outcome}\t{n}')
    if not all(row.verified for row in rows):
        return _outcome('Unverified')
    return 0


def _version(args: Sequence[str]) -> int:
    _no_more(args)
    print(version.version_string())
    return 0


_COMMANDS: dict[str, Callable[[Sequence[str]], int]] = {
    'rotate': _rotate,
    'find-reset': _find_reset,
    'genpw': _genpw,
    'vault': _vault,
    'purls': _purls,
    'sim': _sim,
    'bench': _bench,
    'version': _version,
}


def dispatch(args: Sequence[str]) -> int:
    """Runs the command named by `args[0]`; flags must already be parsed."""
    try:
        if not args:
            raise UsageError(f'Missing command; one of {", ".join(_COMMANDS)}')
        command = _COMMANDS.get(args[0])
        if command is None:
            raise UsageError(f'Unknown command {args[0]!r}')
        return command(args[1:])
    except UsageError as e:
        print(f'rekey: {e}', file=sys.stderr)
        return 2
    except _OPERATIONAL_ERRORS as e:
        logging.error('%s failed: %s', args[0], e)
        print(f'rekey: {e}', file=sys.stderr)
        return _outcome(type(e).__name__)


def run_cli(argv: Sequence[str]) -> int:
    """Parses `argv` (program name first) and runs the command."""
    FLAGS.unparse_flags()
    try:
        remaining = FLAGS(list(argv))
    except flags.Error as e:
        print(f'rekey: {e}', file=sys.stderr)
        return 2
    return dispatch(remaining[1:])


def _parse_flags(argv: list[str]) -> list[str]:
    try:
        return FLAGS(argv)
    except flags.Error as e:
        print(f'rekey: {e}\nPass --helpfull for the list of flags.',
              file=sys.stderr)
        sys.exit(2)


def _app_main(argv: list[str]) -> int:
    return dispatch(argv[1:])


def main() -> None:
    app.run(_app_main, flags_parser=_parse_flags)
