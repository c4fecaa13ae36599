# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Rotation driver: login, reset-page search, reset and persistence.

The search is a depth-first traversal over priority-ranked links. Each
opened page is pushed onto a stack together with its remaining candidate
links; a dead end pops back to the parent, which then tries its next-best
link. The stored credential changes only after the site confirms the reset.
"""

import dataclasses
import enum
import os
import pathlib

from absl import logging

from rekey import config
from rekey import page_model
from rekey import passgen
from rekey import priority
from rekey import purls
from rekey import urls
from rekey import vault
from rekey import webclient
from rekey.constants import patterns


class LoginRejected(Exception):
    """The site did not accept the credentials."""


class BudgetExhausted(Exception):
    """The page budget ran out before the reset page was found."""


class OutcomeKind(enum.Enum):
    RESET_CONFIRMED = 'ResetConfirmed'
    NOT_FOUND = 'NotFound'
    BUDGET_EXHAUSTED = 'BudgetExhausted'
    RESET_AMBIGUOUS = 'ResetAmbiguous'
    LOGIN_FAILED = 'LoginFailed'


_WITH_PASSWORD = (OutcomeKind.RESET_CONFIRMED, OutcomeKind.RESET_AMBIGUOUS)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class RotationOutcome:
    """Terminal state of a rotation.

    Attributes:
      kind: Which outcome occurred.
      new_password: The password now set on the site (ResetConfirmed) or the
        journaled candidate (ResetAmbiguous); None otherwise.
      reset_url: URL of the reset page, when one was reached.
      detail: Human-readable explanation.
    """

    kind: OutcomeKind
    new_password: str | None = None
    reset_url: str | None = None
    detail: str = ''

    def __post_init__(self):
        if (self.new_password is not None) != (self.kind in _WITH_PASSWORD):
            raise ValueError(
                f'new_password must be set iff outcome is one of '
                f'{[k.value for k in _WITH_PASSWORD]}, got {self.kind.value}')
        if self.kind == OutcomeKind.RESET_CONFIRMED and not self.reset_url:
            raise ValueError('ResetConfirmed requires reset_url')

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def journaled_password(self) -> str | None:
        if self.kind == OutcomeKind.RESET_AMBIGUOUS:
            return self.new_password
        return None


@dataclasses.dataclass(frozen=True, slots=True)
class Credentials:
    username: str
    password: str

    def __post_init__(self):
        if not self.username or not self.password:
            raise ValueError('username and password must be non-empty')

    def __repr__(self) -> str:
        return f'Credentials(username={self.username!r}, password=<hidden>)'


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class StorePaths:
    """Where a confirmed rotation is persisted; None keeps it in memory."""

    vault: pathlib.Path | None = None
    purls: pathlib.Path | None = None
    journal: pathlib.Path | None = None

    @classmethod
    def beside_vault(
        cls,
        vault_path: os.PathLike[str] | str,
        purls_path: os.PathLike[str] | str | None = None,
        journal_path: os.PathLike[str] | str | None = None,
    ) -> 'StorePaths':
        vault_path = pathlib.Path(vault_path)
        return cls(
            vault=vault_path,
            purls=pathlib.Path(purls_path) if purls_path else None,
            journal=(pathlib.Path(journal_path) if journal_path else
                     vault_path.with_name(vault_path.name + '.journal')),
        )


@dataclasses.dataclass(slots=True)
class Frame:
    """A page kept open on the stack with its ranked candidate links."""

    page: page_model.PageDocument
    candidates: list[priority.ScoredLink]
    cursor: int = 0

    def next_unvisited(self, visited: set[str]) -> priority.ScoredLink | None:
        while self.cursor < len(self.candidates):
            candidate = self.candidates[self.cursor]
            self.cursor += 1
            if candidate.link.href not in visited:
                return candidate
        return None


@dataclasses.dataclass(kw_only=True)
class RotationSession:
    """State of one rotation against one origin.

    Attributes:
      origin: Normalized origin every request stays on.
      creds: Current credentials for the site.
      client: Origin-bound HTTP session.
      table: Priority table used for ranking.
      max_pages: Page budget for the search.
      stack: Open pages with their remaining candidates.
      visited: Every URL requested or landed on.
      visits: Final URLs of opened pages, in the order they were opened.
      opened_count: Pages opened against the budget.
      reset_page: The reset page, once found.
      outcome: Terminal outcome, once known.
    """

    origin: str
    creds: Credentials
    client: webclient.Session
    table: priority.PriorityTable
    max_pages: int
    stack: list[Frame] = dataclasses.field(default_factory=list)
    visited: set[str] = dataclasses.field(default_factory=set)
    visits: list[str] = dataclasses.field(default_factory=list)
    opened_count: int = 0
    reset_page: page_model.PageDocument | None = None
    outcome: RotationOutcome | None = None

    def spend(self) -> None:
        """Charges one page against the budget.

        Raises:
          BudgetExhausted: If the budget is already spent.
        """
        if self.opened_count >= self.max_pages:
            raise BudgetExhausted(
                f'Opened {self.opened_count} of {self.max_pages} pages')
        self.opened_count += 1

    def landed(self, page: page_model.PageDocument) -> None:
        """Records `page` as opened."""
        self.visited.add(page.final_url)
        self.visits.append(page.final_url)

    def open(self, url: str) -> page_model.PageDocument:
        """Fetches `url` as one opened page.

        Raises:
          BudgetExhausted: If the budget is already spent.
          NetworkError: If the fetch fails; the attempt still counts.
        """
        self.spend()
        self.visited.add(url)
        page = self.client.fetch(url).to_page()
        self.landed(page)
        return page

    def candidates(
        self, page: page_model.PageDocument
    ) -> list[priority.ScoredLink]:
        on_site = [link for link in page.links
                   if urls.same_origin(self.origin, link.href)]
        return priority.rank_links(on_site, self.table, self.visited)


def submit_login(
    client: webclient.Session,
    form: page_model.FormModel,
    creds: Credentials,
) -> page_model.PageDocument:
    """Fills and submits a login form.

    Returns:
      The page the site answered with, after redirects.

    Raises:
      ValueError: If `form` is not a login form.
      LoginRejected: If the answer shows the login failed.
      NetworkError: On transport failure.
    """
    if page_model.classify_form(form) != page_model.FormClass.LOGIN:
        raise ValueError('submit_login needs a login form')
    user_field = form.fields_of(page_model.FieldKind.TEXT)[0]
    pass_field = form.fields_of(page_model.FieldKind.PASSWORD)[0]
    values = {}
    if user_field.name:
        values[user_field.name] = creds.username
    if pass_field.name:
        values[pass_field.name] = creds.password
    page = client.submit_form(form, values).to_page()
    if page_model.detect_login_failure(page):
        raise LoginRejected(f'Login rejected at {page.final_url}')
    return page


def handle_relogin(
    session: RotationSession,
    page: page_model.PageDocument,
    creds: Credentials,
) -> page_model.PageDocument:
    """Re-authenticates on a page that asks for the password again.

    Counts as one opened page.

    Raises:
      ValueError: If `page` has no login form.
      BudgetExhausted: If the budget is already spent.
      LoginRejected, NetworkError: As for `submit_login`.
    """
    form = page_model.find_login_form(page)
    if form is None:
        raise ValueError(f'No login form on {page.final_url}')
    session.spend()
    logging.info('Re-authenticating at %s', page.final_url)
    result = submit_login(session.client, form, creds)
    session.landed(result)
    return result


def dfs_find_reset_page(
    session: RotationSession,
    start_page: page_model.PageDocument,
) -> page_model.PageDocument | None:
    """Depth-first search for a page holding a reset form.

    Returns:
      The reset page, or None once every reachable candidate is exhausted.

    Raises:
      BudgetExhausted: If another page would exceed the budget.
      LoginRejected: If a re-login gate refuses the credentials.
    """
    current = start_page
    while True:
        if current is not None:
            if page_model.find_reset_form(current) is not None:
                return current
            if page_model.find_login_form(current) is not None:
                try:
                    current = handle_relogin(session, current, session.creds)
                except webclient.NetworkError as e:
                    logging.info('Re-login failed in transit: %s', e)
                    current = None
                continue
            session.stack.append(Frame(current, session.candidates(current)))

        step = None
        while session.stack:
            step = session.stack[-1].next_unvisited(session.visited)
            if step is not None:
                break
            session.stack.pop()
        if step is None:
            return None

        logging.debug('Opening %s (priority %d, depth %d)', step.link.href,
                      step.priority, len(session.stack))
        try:
            current = session.open(step.link.href)
        except webclient.NetworkError as e:
            logging.info('Dead end at %s: %s', step.link.href, e)
            current = None


def submit_reset(
    client: webclient.Session,
    form: page_model.FormModel,
    creds: Credentials,
    new_password: str,
) -> page_model.PageDocument:
    """Fills a reset form as (current, new, new) and submits it.

    Raises:
      ValueError: If `form` is not a reset form.
      NetworkError: On transport failure.
    """
    if page_model.classify_form(form) != page_model.FormClass.RESET:
        raise ValueError('submit_reset needs a reset form')
    values = {}
    text_fields = form.fields_of(page_model.FieldKind.TEXT)
    if text_fields and text_fields[0].name:
        values[text_fields[0].name] = creds.username
    fill = (creds.password, new_password, new_password)
    password_fields = form.fields_of(page_model.FieldKind.PASSWORD)
    for field, value in zip(password_fields, fill):
        if field.name:
            values[field.name] = value
    return client.submit_form(form, values).to_page()


def confirm_reset(result_page: page_model.PageDocument) -> bool:
    """Optimistic: anything without a reset form or error text is success."""
    if page_model.find_reset_form(result_page) is not None:
        return False
    return not page_model.contains_any(result_page,
                                       patterns.RESET_ERROR_STRINGS)


def _new_session(entry_url, creds, *, max_pages, table, client):
    origin = urls.normalize_origin(entry_url)
    return RotationSession(
        origin=origin,
        creds=creds,
        client=client or webclient.Session(origin),
        table=table or priority.default_table(),
        max_pages=config.max_pages if max_pages is None else max_pages,
    )


def _login(
    session: RotationSession, entry_url: str
) -> page_model.PageDocument | None:
    """Logs in from `entry_url`; on refusal sets LoginFailed, returns None."""
    entry = session.client.fetch(entry_url).to_page()
    session.visited.update((entry_url, entry.final_url))
    form = page_model.find_login_form(entry)
    if form is None:
        session.outcome = RotationOutcome(
            kind=OutcomeKind.LOGIN_FAILED,
            detail=f'No login form at {entry.final_url}')
        return None
    try:
        landing = submit_login(session.client, form, session.creds)
    except LoginRejected as e:
        session.outcome = RotationOutcome(kind=OutcomeKind.LOGIN_FAILED,
                                          detail=str(e))
        return None
    session.visited.add(landing.final_url)
    logging.info('Logged in to %s, landed on %s', session.origin,
                 landing.final_url)
    return landing


def _search(
    session: RotationSession,
    landing: page_model.PageDocument,
    cached_url: str | None,
) -> None:
    """Finds the reset page, trying the cached URL before the DFS."""
    try:
        if cached_url and cached_url not in session.visited:
            try:
                page = session.open(cached_url)
                if (page_model.find_reset_form(page) is None and
                        page_model.find_login_form(page) is not None):
                    page = handle_relogin(session, page, session.creds)
            except webclient.NetworkError as e:
                logging.info('Cached reset URL %s failed: %s', cached_url, e)
            else:
                if page_model.find_reset_form(page) is not None:
                    session.reset_page = page
                    return
                logging.info('Cached reset URL %s shows no reset form; '
                             'searching', cached_url)
        session.reset_page = dfs_find_reset_page(session, landing)
    except BudgetExhausted as e:
        session.outcome = RotationOutcome(kind=OutcomeKind.BUDGET_EXHAUSTED,
                                          detail=str(e))
        return
    except LoginRejected as e:
        session.outcome = RotationOutcome(kind=OutcomeKind.LOGIN_FAILED,
                                          detail=str(e))
        return
    if session.reset_page is None:
        session.outcome = RotationOutcome(
            kind=OutcomeKind.NOT_FOUND,
            detail=f'No reset page after {session.opened_count} pages')


def _journal(session: RotationSession, paths: StorePaths, candidate: str):
    if paths.journal is not None:
        vault.append_journal(paths.journal, session.origin, candidate)
    else:
        logging.warning('Unconfirmed reset for %s and no journal configured',
                        session.origin)


def _reset(
    session: RotationSession,
    vault_db: vault.Vault,
    purls_map: purls.PurlsMap,
    paths: StorePaths,
    new_password: str,
) -> RotationOutcome:
    page = session.reset_page
    form = page_model.find_reset_form(page)
    try:
        result = submit_reset(session.client, form, session.creds, new_password)
    except webclient.NetworkError as e:
        _journal(session, paths, new_password)
        return RotationOutcome(kind=OutcomeKind.RESET_AMBIGUOUS,
                               new_password=new_password,
                               reset_url=page.final_url,
                               detail=f'Reset submission failed: {e}')
    if not confirm_reset(result):
        _journal(session, paths, new_password)
        return RotationOutcome(kind=OutcomeKind.RESET_AMBIGUOUS,
                               new_password=new_password,
                               reset_url=page.final_url,
                               detail=f'Unconfirmed at {result.final_url}')

    vault.upsert(vault_db, vault.CredentialRecord(
        origin=session.origin, username=session.creds.username,
        password=new_password))
    purls.put(purls_map, session.origin, page.final_url)
    try:
        if paths.vault is not None:
            vault.save(vault_db, paths.vault)
    except vault.VaultError:
        # The site already holds the new password.
        _journal(session, paths, new_password)
        raise
    if paths.purls is not None:
        try:
            purls.save(purls_map, paths.purls)
        except vault.IOFailure as e:
            # A missing cache entry only costs a search next time.
            logging.warning('Reset URL cache %s not saved: %s', paths.purls, e)
    logging.info('Password for %s rotated via %s', session.origin,
                 page.final_url)
    return RotationOutcome(kind=OutcomeKind.RESET_CONFIRMED,
                           new_password=new_password,
                           reset_url=page.final_url)


def rotate(
    entry_url: str,
    creds: Credentials,
    vault_db: vault.Vault,
    purls_map: purls.PurlsMap,
    *,
    max_pages: int | None = None,
    table: priority.PriorityTable | None = None,
    paths: StorePaths = StorePaths(),
    client: webclient.Session | None = None,
    charset: passgen.CharsetSpec | None = None,
    length: int | None = None,
    rng: passgen.RandomBits | None = None,
) -> RotationSession:
    """Runs one full rotation and returns the session record.

    Args:
      entry_url: Login page of the site; its origin scopes the session.
      creds: Current credentials.
      vault_db: Vault updated only on ResetConfirmed.
      purls_map: Reset-URL cache consulted first and updated on success.
      max_pages: Page budget; defaults to `config.max_pages`.
      table: Priority table; defaults to the built-in one.
      paths: Files to persist the vault, purls and recovery journal to.
      client: HTTP session to use; one is created for the origin if None.
      charset: Password alphabet.
      length: Password length.
      rng: Random source for the password.

    Returns:
      The finished session; `session.outcome` is always set.

    Raises:
      NetworkError: If the login page cannot be fetched or submitted.
      VaultError: If a confirmed rotation cannot be saved; the candidate is
        journaled first.
    """
    session = _new_session(entry_url, creds, max_pages=max_pages, table=table,
                           client=client)
    landing = _login(session, entry_url)
    if landing is None:
        return session
    _search(session, landing, purls.get(purls_map, session.origin))
    if session.outcome is not None:
        logging.info('Rotation for %s ended: %s', session.origin,
                     session.outcome.name)
        return session
    new_password = passgen.generate_password(charset, length, rng).value
    session.outcome = _reset(session, vault_db, purls_map, paths, new_password)
    return session


def run_rotation(
    origin: str,
    creds: Credentials,
    vault_db: vault.Vault,
    purls_map: purls.PurlsMap,
    max_pages: int | None = None,
    **kwargs,
) -> RotationOutcome:
    return rotate(origin, creds, vault_db, purls_map, max_pages=max_pages,
                  **kwargs).outcome


def find_reset_page(
    entry_url: str,
    creds: Credentials,
    *,
    max_pages: int | None = None,
    table: priority.PriorityTable | None = None,
    client: webclient.Session | None = None,
) -> RotationSession:
    """Logs in and searches for the reset page without changing anything.

    On success `session.reset_page` is set and `session.outcome` stays None.
    """
    session = _new_session(entry_url, creds, max_pages=max_pages, table=table,
                           client=client)
    landing = _login(session, entry_url)
    if landing is not None:
        _search(session, landing, cached_url=None)
    return session
