"""Tests for login, reset-page search and the rotation outcomes."""

import os

import pytest

from rekey import navigator
from rekey import page_model
from rekey import priority
from rekey import purls
from rekey import urls
from rekey import vault
from rekey import webclient
from rekey.navigator import OutcomeKind
from rekey.sim import site_spec


def _paths(tmp_path):
    return navigator.StorePaths.beside_vault(tmp_path / 'vault.json',
                                             tmp_path / 'purls.txt')


def _visited_paths(session):
    return [urls.path_of(url) for url in session.visits]


def _entry_page(client, site):
    return client.fetch(site.entry_url).to_page()


class _RecordingClient:
    """Captures submitted values instead of sending them."""

    def submit_form(self, form, values):
        self.values = dict(values)
        return webclient.FetchResult(final_url=form.action_url, status=200,
                                     body=b'<p>ok</p>')


class TestSubmitLogin:

    def test_correct_credentials_reach_landing(self, simple_site, creds_for):
        with webclient.Session(simple_site.url) as client:
            form = page_model.find_login_form(_entry_page(client, simple_site))
            page = navigator.submit_login(client, form,
                                          creds_for(simple_site.spec))
        assert urls.path_of(page.final_url) == '/home'
        assert not page_model.detect_login_failure(page)

    def test_wrong_password_rejected(self, simple_site):
        creds = navigator.Credentials(simple_site.spec.account.username, 'nope')
        with webclient.Session(simple_site.url) as client:
            form = page_model.find_login_form(_entry_page(client, simple_site))
            with pytest.raises(navigator.LoginRejected):
                navigator.submit_login(client, form, creds)

    def test_requires_login_form(self, simple_site, creds_for):
        form = page_model.FormModel(index=0, action_url=simple_site.url,
                                    method='POST', fields=())
        with webclient.Session(simple_site.url) as client:
            with pytest.raises(ValueError):
                navigator.submit_login(client, form,
                                       creds_for(simple_site.spec))


class TestResetHelpers:

    def test_submit_reset_fill_order(self):
        kinds = page_model.FieldKind
        form = page_model.FormModel(
            index=0, action_url='https://s.test/pw', method='POST',
            fields=(page_model.FormField('csrf', kinds.HIDDEN, 't'),
                    page_model.FormField('user', kinds.TEXT),
                    page_model.FormField('old', kinds.PASSWORD),
                    page_model.FormField('new', kinds.PASSWORD),
                    page_model.FormField('again', kinds.PASSWORD),
                    page_model.FormField('save', kinds.SUBMIT, 'Save')))
        client = _RecordingClient()
        navigator.submit_reset(client, form,
                               navigator.Credentials('ann', 'current'),
                               'fresh')
        assert client.values == {'user': 'ann', 'old': 'current',
                                 'new': 'fresh', 'again': 'fresh'}

    def test_submit_reset_requires_reset_form(self, echo_url):
        form = page_model.FormModel(index=0, action_url=f'{echo_url}/echo',
                                    method='POST', fields=())
        with webclient.Session(echo_url) as client:
            with pytest.raises(ValueError):
                navigator.submit_reset(client, form,
                                       navigator.Credentials('a', 'b'), 'c')

    @pytest.mark.parametrize('html, expected', [
        (b'<p>Your password has been changed.</p>', True),
        (b'', True),
        (b'<p>Error: passwords differ</p>', False),
        (b'<p>Invalid password</p>', False),
        (b'<form><input type=password name=a><input type=password name=b>'
         b'<input type=password name=c><input type=submit></form>', False),
    ])
    def test_confirm_reset(self, html, expected):
        page = page_model.parse_page(html, 'https://s.test/done')
        assert navigator.confirm_reset(page) is expected


class TestOutcome:

    def test_password_required_for_confirmed(self):
        with pytest.raises(ValueError):
            navigator.RotationOutcome(kind=OutcomeKind.RESET_CONFIRMED,
                                      reset_url='https://s.test/pw')

    def test_password_forbidden_for_not_found(self):
        with pytest.raises(ValueError):
            navigator.RotationOutcome(kind=OutcomeKind.NOT_FOUND,
                                      new_password='x')

    def test_ambiguous_exposes_journaled_password(self):
        outcome = navigator.RotationOutcome(kind=OutcomeKind.RESET_AMBIGUOUS,
                                            new_password='cand')
        assert outcome.journaled_password == 'cand'
        assert outcome.name == 'ResetAmbiguous'

    def test_credentials_hide_password(self):
        assert 'secret' not in repr(navigator.Credentials('ann', 'secret'))
        with pytest.raises(ValueError):
            navigator.Credentials('', 'x')


class TestRotate:

    def test_simple_site(self, simple_site, creds_for, tmp_path):
        paths = _paths(tmp_path)
        db, pm = vault.Vault(), purls.PurlsMap()
        session = navigator.rotate(simple_site.entry_url,
                                   creds_for(simple_site.spec), db, pm,
                                   paths=paths)
        outcome = session.outcome
        assert outcome.kind == OutcomeKind.RESET_CONFIRMED
        assert simple_site.state.password == outcome.new_password
        assert simple_site.state.reset_count == 1
        assert len(outcome.new_password) == 12
        reset_url = simple_site.url + simple_site.spec.reset_path
        assert outcome.reset_url == reset_url
        assert vault.load(paths.vault) == db
        assert vault.find(db, simple_site.url).password == outcome.new_password
        assert purls.load(paths.purls).entries == {simple_site.url: reset_url}
        assert session.opened_count == 1
        assert session.opened_count <= session.max_pages

    def test_all_fetches_stay_on_origin(self, serve, creds_for, tmp_path):
        site = serve(site_spec.gen_site('complex', seed=5))
        session = navigator.rotate(site.entry_url, creds_for(site.spec),
                                   vault.Vault(), purls.PurlsMap())
        assert all(urls.same_origin(site.url, u) for u in session.visited)
        assert len(set(session.visits)) == len(session.visits)

    def test_relogin_site(self, relogin_site, creds_for):
        session = navigator.rotate(relogin_site.entry_url,
                                   creds_for(relogin_site.spec),
                                   vault.Vault(), purls.PurlsMap())
        assert session.outcome.kind == OutcomeKind.RESET_CONFIRMED
        assert _visited_paths(session) == [relogin_site.spec.gate_path,
                                           relogin_site.spec.reset_path]
        assert session.opened_count == 2

    def test_wrong_credentials_fail_login(self, simple_site, tmp_path):
        db = vault.Vault()
        creds = navigator.Credentials(simple_site.spec.account.username, 'bad')
        outcome = navigator.run_rotation(simple_site.entry_url, creds, db,
                                         purls.PurlsMap(),
                                         paths=_paths(tmp_path))
        assert outcome.kind == OutcomeKind.LOGIN_FAILED
        assert len(db) == 0
        assert not (tmp_path / 'vault.json').exists()

    def test_entry_page_without_login_form(self, simple_site, creds_for):
        outcome = navigator.run_rotation(simple_site.url + '/nowhere',
                                         creds_for(simple_site.spec),
                                         vault.Vault(), purls.PurlsMap())
        assert outcome.kind == OutcomeKind.LOGIN_FAILED

    def test_unreachable_entry_raises(self, creds_for):
        spec = site_spec.gen_site('simple', seed=0)
        with pytest.raises(webclient.NetworkError):
            navigator.run_rotation('http://127.0.0.1:9/', creds_for(spec),
                                   vault.Vault(), purls.PurlsMap())

    def test_button_link_not_found(self, serve, creds_for, tmp_path):
        site = serve(site_spec.gen_site('button-link', seed=2))
        db = vault.Vault()
        vault.upsert(db, vault.CredentialRecord(
            origin=site.url, username=site.spec.account.username,
            password=site.spec.account.password))
        paths = _paths(tmp_path)
        vault.save(db, paths.vault)
        before = paths.vault.read_bytes()
        outcome = navigator.run_rotation(site.entry_url, creds_for(site.spec),
                                         db, purls.PurlsMap(), paths=paths)
        assert outcome.kind == OutcomeKind.NOT_FOUND
        assert paths.vault.read_bytes() == before
        assert site.state.reset_count == 0

    def test_two_field_reset_not_found(self, serve, creds_for):
        site = serve(site_spec.gen_site('two-field-reset', seed=2))
        outcome = navigator.run_rotation(site.entry_url, creds_for(site.spec),
                                         vault.Vault(), purls.PurlsMap())
        assert outcome.kind == OutcomeKind.NOT_FOUND

    def test_script_gated_is_ambiguous_and_journaled(self, serve, creds_for,
                                                     tmp_path):
        site = serve(site_spec.gen_site('script-gated', seed=2))
        paths = _paths(tmp_path)
        db, pm = vault.Vault(), purls.PurlsMap()
        outcome = navigator.run_rotation(site.entry_url, creds_for(site.spec),
                                         db, pm, paths=paths)
        assert outcome.kind == OutcomeKind.RESET_AMBIGUOUS
        assert len(db) == 0 and len(pm) == 0
        assert site.state.reset_count == 0
        (entry,) = vault.read_journal(paths.journal)
        assert entry.origin == site.url
        assert entry.candidate_password == outcome.journaled_password

    def test_failed_reset_post_is_ambiguous(self, simple_site, creds_for,
                                            faulty_client, tmp_path):
        spec = simple_site.spec
        client, _ = faulty_client(
            simple_site.url,
            lambda method, path: method == 'POST' and path == spec.reset_path)
        paths = _paths(tmp_path)
        db = vault.Vault()
        outcome = navigator.run_rotation(simple_site.entry_url, creds_for(spec),
                                         db, purls.PurlsMap(), paths=paths,
                                         client=client)
        assert outcome.kind == OutcomeKind.RESET_AMBIGUOUS
        assert len(db) == 0
        assert not paths.vault.exists()
        assert len(vault.read_journal(paths.journal)) == 1

    def test_failed_fetch_is_a_dead_end(self, serve, creds_for, faulty_client):
        spec = site_spec.backtrack_demo_site()
        site = serve(spec)
        client, _ = faulty_client(site.url,
                                  lambda method, path: path == '/url-5')
        session = navigator.rotate(site.entry_url, creds_for(spec),
                                   vault.Vault(), purls.PurlsMap(),
                                   client=client)
        assert session.outcome.kind == OutcomeKind.RESET_CONFIRMED
        # The failed fetch still counts against the budget.
        assert session.opened_count == 4
        assert _visited_paths(session) == ['/url-3', '/url-7', '/url-9']

    def test_budget_exhausted(self, serve, creds_for, tmp_path):
        spec = site_spec.backtrack_demo_site()
        site = serve(spec)
        paths = _paths(tmp_path)
        session = navigator.rotate(site.entry_url, creds_for(spec),
                                   vault.Vault(), purls.PurlsMap(),
                                   max_pages=3, paths=paths)
        assert session.outcome.kind == OutcomeKind.BUDGET_EXHAUSTED
        assert session.opened_count == 3
        assert site.state.reset_count == 0
        assert not paths.vault.exists()

    def test_backtracking_visit_order(self, serve, creds_for):
        spec = site_spec.backtrack_demo_site()
        site = serve(spec)
        session = navigator.find_reset_page(site.entry_url, creds_for(spec))
        assert _visited_paths(session) == ['/url-3', '/url-5', '/url-7',
                                           '/url-9']
        assert urls.path_of(session.reset_page.final_url) == '/url-9'
        assert session.outcome is None

    def test_find_reset_page_changes_nothing(self, simple_site, creds_for):
        session = navigator.find_reset_page(simple_site.entry_url,
                                            creds_for(simple_site.spec))
        assert session.reset_page is not None
        assert simple_site.state.reset_count == 0
        assert all(r.method == 'GET' or r.path == '/login'
                   for r in simple_site.requests)

    def test_stale_cached_url_falls_back_to_search(self, simple_site,
                                                   creds_for):
        pm = purls.PurlsMap()
        purls.put(pm, simple_site.url, simple_site.url + '/moved')
        session = navigator.rotate(simple_site.entry_url,
                                   creds_for(simple_site.spec),
                                   vault.Vault(), pm)
        assert session.outcome.kind == OutcomeKind.RESET_CONFIRMED
        assert _visited_paths(session) == ['/moved',
                                           simple_site.spec.reset_path]
        assert purls.get(pm, simple_site.url).endswith(
            simple_site.spec.reset_path)

    def test_cached_url_behind_relogin_gate(self, relogin_site, creds_for):
        spec = relogin_site.spec
        pm = purls.PurlsMap()
        purls.put(pm, relogin_site.url, relogin_site.url + spec.reset_path)
        session = navigator.rotate(relogin_site.entry_url, creds_for(spec),
                                   vault.Vault(), pm)
        assert session.outcome.kind == OutcomeKind.RESET_CONFIRMED
        assert session.opened_count == 2

    def test_vault_write_failure_is_journaled(self, simple_site, creds_for,
                                              tmp_path, monkeypatch):
        paths = _paths(tmp_path)

        def broken_replace(src, dst):
            raise OSError('read-only file system')

        monkeypatch.setattr(os, 'replace', broken_replace)
        with pytest.raises(vault.IOFailure):
            navigator.run_rotation(simple_site.entry_url,
                                   creds_for(simple_site.spec), vault.Vault(),
                                   purls.PurlsMap(), paths=paths)
        (entry,) = vault.read_journal(paths.journal)
        assert entry.candidate_password == simple_site.state.password


    def test_purls_write_failure_still_confirms(self, simple_site, creds_for,
                                               tmp_path, monkeypatch):
        paths = _paths(tmp_path)

        def broken_save(purls_map, path):
            raise vault.IOFailure(f'cannot write {path}')

        monkeypatch.setattr(purls, 'save', broken_save)
        outcome = navigator.run_rotation(simple_site.entry_url,
                                         creds_for(simple_site.spec),
                                         vault.Vault(), purls.PurlsMap(),
                                         paths=paths)
        assert outcome.kind == OutcomeKind.RESET_CONFIRMED
        stored = vault.find(vault.load(paths.vault), simple_site.url)
        assert stored.password == simple_site.state.password
        assert not paths.purls.exists()
        assert vault.read_journal(paths.journal) == []

    def test_spend_charges_the_budget(self, simple_site, creds_for):
        session = navigator.RotationSession(
            origin=simple_site.url, creds=creds_for(simple_site.spec),
            client=webclient.Session(simple_site.url),
            table=priority.default_table(), max_pages=2)
        session.spend()
        session.spend()
        with pytest.raises(navigator.BudgetExhausted):
            session.spend()
        assert session.opened_count == 2


class TestRelogin:

    def test_wrong_credentials_at_gate(self, relogin_site, creds_for):
        spec = relogin_site.spec
        session = navigator.RotationSession(
            origin=relogin_site.url, creds=creds_for(spec),
            client=webclient.Session(relogin_site.url),
            table=priority.default_table(), max_pages=20)
        entry = _entry_page(session.client, relogin_site)
        navigator.submit_login(session.client,
                               page_model.find_login_form(entry), session.creds)
        relogin_site.state.password = 'rotated elsewhere'
        gate = session.client.fetch(relogin_site.url + spec.gate_path).to_page()
        with pytest.raises(navigator.LoginRejected):
            navigator.handle_relogin(session, gate, session.creds)
        assert session.opened_count == 1

    def test_page_without_login_form(self, simple_site, creds_for):
        session = navigator.RotationSession(
            origin=simple_site.url, creds=creds_for(simple_site.spec),
            client=webclient.Session(simple_site.url),
            table=priority.default_table(), max_pages=20)
        page = page_model.parse_page(b'<p>hi</p>', simple_site.url + '/')
        with pytest.raises(ValueError):
            navigator.handle_relogin(session, page, session.creds)
