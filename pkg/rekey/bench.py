# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Rotates every site of a generated corpus and reports how it went."""

from collections.abc import Sequence
from concurrent import futures
import csv
import dataclasses
import os
import pathlib
import tempfile
import time

from absl import logging

from rekey import navigator
from rekey import purls
from rekey import vault
from rekey import webclient
from rekey.sim import server
from rekey.sim import site_spec

REPORT_COLUMNS = ('origin', 'category', 'outcome', 'pages_opened',
                  'elapsed_ms')


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class BenchRow:
    origin: str
    category: str
    outcome: str
    pages_opened: int
    elapsed_ms: int
    # The simulated account agrees with the vault: the new password on
    # ResetConfirmed, the original one otherwise.
    verified: bool
    seed: int = 0

    def as_row(self) -> list[str | int]:
        return [self.origin, self.category, self.outcome, self.pages_opened,
                self.elapsed_ms]


def rotate_site(spec: site_spec.SiteSpec,
                max_pages: int | None = None) -> BenchRow:
    """Serves `spec`, rotates it against a throwaway vault and checks it."""
    creds = navigator.Credentials(spec.account.username, spec.account.password)
    with (server.serve_site(spec) as site,
          tempfile.TemporaryDirectory(prefix='rekey-bench-') as tmp):
        paths = navigator.StorePaths.beside_vault(
            pathlib.Path(tmp) / 'vault.json', pathlib.Path(tmp) / 'purls.txt')
        vault_db, purls_map = vault.Vault(), purls.PurlsMap()
        start = time.perf_counter()
        try:
            session = navigator.rotate(site.entry_url, creds, vault_db,
                                       purls_map, max_pages=max_pages,
                                       paths=paths)
            outcome, opened = session.outcome, session.opened_count
        except webclient.NetworkError as e:
            logging.warning('Cannot reach %s: %s', site.url, e)
            outcome, opened = None, 0
        elapsed_ms = round((time.perf_counter() - start) * 1000)

        record = vault.find(vault_db, site.url, creds.username)
        confirmed = (outcome is not None and
                     outcome.kind == navigator.OutcomeKind.RESET_CONFIRMED)
        if confirmed:
            verified = (record is not None and
                        record.password == site.state.password and
                        site.state.reset_count == 1)
        else:
            verified = record is None and site.state.reset_count == 0
        if not verified:
            logging.error('Site %s-%d disagrees with the vault after %s',
                          spec.category, spec.seed,
                          outcome.name if outcome else 'NetworkError')
        return BenchRow(
            origin=site.url,
            category=spec.category,
            outcome=outcome.name if outcome else 'NetworkError',
            pages_opened=opened,
            elapsed_ms=elapsed_ms,
            verified=verified,
            seed=spec.seed,
        )


def write_report(rows: Sequence[BenchRow],
                 report_path: os.PathLike[str] | str) -> None:
    report_path = pathlib.Path(report_path)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    with open(report_path, 'wt', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(row.as_row() for row in rows)


def run_bench(
    corpus_dir: os.PathLike[str] | str,
    report_path: os.PathLike[str] | str,
    jobs: int = 1,
    max_pages: int | None = None,
) -> list[BenchRow]:
    """Rotates every `*.json` site under `corpus_dir`, `jobs` at a time.

    Each site gets its own server and its own vault, so rotations do not
    share state. Rows are written in corpus file order.

    Raises:
      ValueError: If `jobs` < 1 or the corpus is empty.
    """
    if jobs < 1:
        raise ValueError(f'jobs must be >= 1, got {jobs}')
    files = sorted(pathlib.Path(corpus_dir).glob('*.json'))
    if not files:
        raise ValueError(f'No site specs in {corpus_dir}')
    specs = [site_spec.load_site(path) for path in files]
    logging.info('Rotating %d sites with %d workers', len(specs), jobs)
    with futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        rows = list(pool.map(lambda s: rotate_site(s, max_pages), specs))
    write_report(rows, report_path)
    return rows
