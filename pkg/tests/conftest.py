# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Shared fixtures: served simulator sites, an echo server, fault adapters."""

import threading
from urllib import parse

import flask
import pytest
import requests
from requests import adapters
from werkzeug import serving

from rekey import navigator
from rekey import webclient
from rekey.sim import server
from rekey.sim import site_spec


class FaultyAdapter(adapters.HTTPAdapter):
    """Fails requests whose path matches `fail_on`.

    Attributes:
      fail_on: Predicate over (method, path).
      error: Exception raised instead of sending.
      sent: (method, path) of every request seen.
    """

    def __init__(self, fail_on, error=requests.ConnectionError, **kwargs):
        super().__init__(**kwargs)
        self.fail_on = fail_on
        self.error = error
        self.sent = []

    def send(self, request, **kwargs):
        path = parse.urlsplit(request.url).path
        self.sent.append((request.method, path))
        if self.fail_on(request.method, path):
            raise self.error(f'injected failure for {request.method} {path}')
        return super().send(request, **kwargs)


@pytest.fixture
def faulty_client():
    """Factory for a client whose transport fails on chosen requests."""

    def _make(origin, fail_on, error=requests.ConnectionError):
        http = requests.Session()
        adapter = FaultyAdapter(fail_on, error)
        http.mount('http://', adapter)
        return webclient.Session(origin, http=http), adapter

    return _make


@pytest.fixture
def creds_for():
    def _creds(spec: site_spec.SiteSpec) -> navigator.Credentials:
        return navigator.Credentials(spec.account.username,
                                     spec.account.password)

    return _creds


@pytest.fixture
def serve():
    """Factory serving SiteSpecs for the duration of a test."""
    started = []

    def _serve(spec):
        site = server.serve_site(spec)
        started.append(site)
        return site

    yield _serve
    for site in started:
        site.shutdown()


@pytest.fixture
def simple_site(serve):
    return serve(site_spec.gen_site('simple', seed=7))


@pytest.fixture
def relogin_site(serve):
    return serve(site_spec.gen_site('relogin', seed=3))


def _echo_app() -> flask.Flask:
    app = flask.Flask('echo', static_folder=None)

    @app.route('/echo', methods=['GET', 'POST'])
    def echo():
        return flask.jsonify(
            method=flask.request.method,
            args=list(flask.request.args.items(multi=True)),
            form=list(flask.request.form.items(multi=True)),
            raw=flask.request.get_data(as_text=True),
            cookies=dict(flask.request.cookies))

    @app.get('/hops/<int:n>')
    def hops(n):
        if n == 0:
            return 'arrived'
        return flask.redirect(f'/hops/{n - 1}', code=302)

    @app.post('/see-other')
    def see_other():
        return flask.redirect('/echo?after=post', code=303)

    @app.get('/set-cookie')
    def set_cookie():
        response = flask.make_response('set')
        response.set_cookie('token', 'abc123')
        return response

    @app.get('/offsite')
    def offsite():
        return flask.redirect('http://elsewhere.invalid/steal', code=302)

    @app.get('/status/<int:code>')
    def status(code):
        return f'status {code}', code

    return app


@pytest.fixture(scope='session')
def echo_url():
    """Base URL of a local server that reflects requests back as JSON."""
    httpd = serving.make_server('127.0.0.1', 0, _echo_app(), threaded=True)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f'http://127.0.0.1:{httpd.socket.getsockname()[1]}'
    httpd.shutdown()
    thread.join()
    httpd.server_close()
