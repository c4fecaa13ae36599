# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Reference depth-first search over a SiteSpec's declared link graph.

No HTTP is involved. Links are filtered the way a rendered page exposes
them and ranked by the priority table directly, so the visit order here is
what a correct navigator must produce.
"""

import dataclasses
from urllib import parse

from rekey import config
from rekey import page_model
from rekey import priority
from rekey import urls
from rekey.sim import site_spec

_BASE = 'http://oracle.invalid'


@dataclasses.dataclass(frozen=True, slots=True)
class OracleRun:
    """Result of a reference search.

    Attributes:
      visits: Paths of opened pages, in order.
      found: Whether the reset page was reached.
      budget_exhausted: Whether the search stopped on the page budget.
    """

    visits: tuple[str, ...]
    found: bool
    budget_exhausted: bool

    @property
    def opened_count(self) -> int:
        return len(self.visits)


def _url(path: str) -> str:
    return parse.urljoin(_BASE, path)


def _visible_links(page: site_spec.PageSpec) -> list[page_model.LinkRef]:
    refs = []
    for link in page.links:
        if link.kind == 'button':
            continue
        text = '' if link.kind == 'image' else link.text
        refs.append(page_model.LinkRef(text=text, href=_url(link.target)))
    return refs


def _ranked(
    links: list[page_model.LinkRef],
    table: priority.PriorityTable,
    visited: set[str],
) -> list[str]:
    """Unvisited hrefs by best matching priority, then document position."""
    keyed = []
    for position, link in enumerate(links):
        if link.href in visited:
            continue
        text = link.text.lower()
        best = max((value for pattern, value in table.entries
                    if pattern in text), default=None)
        if best is not None:
            keyed.append((-best, position, link.href))
    return [href for _, _, href in sorted(keyed)]


def oracle_search(
    spec: site_spec.SiteSpec,
    table: priority.PriorityTable | None = None,
    max_pages: int | None = None,
) -> OracleRun:
    """Runs the reference search from the landing page.

    Args:
      spec: The site.
      table: Priority table; defaults to the built-in one.
      max_pages: Page budget; defaults to `config.max_pages`. Pass a large
        value to learn how many pages an unbounded search would need.
    """
    table = table or priority.default_table()
    max_pages = config.max_pages if max_pages is None else max_pages
    empty = site_spec.PageSpec(title='Not found')
    visited = {_url(spec.entry_path), _url(spec.home_path)}
    visits: list[str] = []
    stack: list[tuple[list[str], list[int]]] = []

    def run(found=False, exhausted=False):
        return OracleRun(visits=tuple(visits), found=found,
                         budget_exhausted=exhausted)

    path: str | None = spec.home_path
    while True:
        if path is not None:
            page = spec.pages.get(path, empty)
            if page.form_with('reset') is not None:
                return run(found=True)
            gate = page.form_with('login', 'relogin-gate')
            if gate is not None:
                if len(visits) >= max_pages:
                    return run(exhausted=True)
                path = gate.next or spec.home_path
                visited.add(_url(path))
                visits.append(path)
                continue
            on_site = [link for link in _visible_links(page)
                       if urls.same_origin(_BASE, link.href)]
            stack.append((_ranked(on_site, table, visited), [0]))

        step = None
        while stack:
            candidates, cursor = stack[-1]
            while cursor[0] < len(candidates):
                href = candidates[cursor[0]]
                cursor[0] += 1
                if href not in visited:
                    step = href
                    break
            if step is not None:
                break
            stack.pop()
        if step is None:
            return run()

        if len(visits) >= max_pages:
            return run(exhausted=True)
        visited.add(step)
        path = urls.path_of(step)
        if path == site_spec.LOGOUT_PATH:
            # Lands signed out on the entry page, which then asks to log in.
            path = spec.entry_path
        visits.append(path)


def oracle_dfs(
    spec: site_spec.SiteSpec,
    table: priority.PriorityTable | None = None,
    max_pages: int | None = None,
) -> list[str]:
    """Paths the search opens, in order; empty if the landing page resets."""
    return list(oracle_search(spec, table, max_pages).visits)
