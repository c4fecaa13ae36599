# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Serves a SiteSpec over HTTP on localhost.

Sessions are kept server-side and keyed by a `sid` cookie. Every request is
recorded so tests can count what a rotation fetched. Password changes are
serialized through the site state's lock.
"""

from collections.abc import Callable
import dataclasses
import secrets
import threading

from absl import logging
import flask
from werkzeug import serving

from rekey.sim import site_spec

# Value page scripts would put in the reset form on a keyboard event.
_JS_TOKEN = 'typed-by-hand'

_PAGE = """<!doctype html>
<html>
<head><title>{{ title }}</title></head>
<body>
<h1>{{ title }}</h1>
{% if message %}<p class="message">{{ message }}</p>{% endif %}
<nav>
{% for link in links %}
{% if link.kind == 'button' %}
<button type="button" onclick="window.location.href='{{ link.target }}'"><a href="{{ link.target }}">{{ link.text }}</a></button>
{% elif link.kind == 'image' %}
<a href="{{ link.target }}"><img src="/img/{{ loop.index }}.png" alt="{{ link.text }}"></a>
{% else %}
<a href="{{ link.target }}">{{ link.text }}</a>
{% endif %}
{% endfor %}
</nav>
{% for form in forms %}
{% if form.behavior in ('login', 'relogin-gate') %}
<form method="post" action="{{ form.action }}">
  <input type="hidden" name="csrf" value="{{ csrf }}">
  <input type="hidden" name="next" value="{{ form.next }}">
  <label>Username <input type="text" name="username"></label>
  <label>Password <input type="password" name="password"></label>
  <input type="submit" value="Sign in">
</form>
{% elif form.behavior == 'reset' %}
<form method="post" action="{{ form.action }}">
  <input type="hidden" name="csrf" value="{{ csrf }}">
  <label>Username <input type="text" name="username"></label>
  <label>Current <input type="password" name="current_password"></label>
  <label>New <input type="password" name="new_password"></label>
  <label>Confirm <input type="password" name="confirm_password"></label>
  <input type="submit" value="Save">
</form>
{% if form.js_token %}
<script>
document.querySelector('form').addEventListener('keydown', function (e) {
  var t = document.createElement('input');
  t.type = 'hidden'; t.name = 'js_token'; t.value = '{{ js_token }}';
  e.currentTarget.appendChild(t);
}, {once: true});
</script>
{% endif %}
{% elif form.behavior == 'reset-two-field' %}
<form method="post" action="{{ form.action }}">
  <input type="hidden" name="csrf" value="{{ csrf }}">
  <label>New <input type="password" name="new_password"></label>
  <label>Confirm <input type="password" name="confirm_password"></label>
  <input type="submit" value="Save">
</form>
{% else %}
<form method="get" action="{{ form.action }}">
  <input type="search" name="q">
  <input type="submit" value="Search">
</form>
{% endif %}
{% endfor %}
</body>
</html>
"""


class BindFailure(Exception):
    """The simulator could not listen on the requested port."""


@dataclasses.dataclass
class SiteState:
    """Mutable account state of a served site."""

    password: str
    reset_count: int = 0
    lock: threading.Lock = dataclasses.field(
        default_factory=threading.Lock, repr=False, compare=False)


@dataclasses.dataclass
class _Visitor:
    csrf: str
    authenticated: bool = False
    reauthed: bool = False


@dataclasses.dataclass(frozen=True, slots=True)
class RequestRecord:
    method: str
    path: str
    sid: str


def create_app(
    spec: site_spec.SiteSpec,
    state: SiteState,
    record: Callable[[RequestRecord], None] = lambda r: None,
) -> flask.Flask:
    """Builds the Flask app answering for `spec`."""
    app = flask.Flask(__name__, static_folder=None)
    visitors: dict[str, _Visitor] = {}
    visitors_lock = threading.Lock()
    gate_path = spec.gate_path
    not_found = site_spec.PageSpec(title='Page not found')

    def render(page: site_spec.PageSpec, message: str = '', status: int = 200):
        body = flask.render_template_string(
            _PAGE, title=page.title, message=message, links=page.links,
            forms=page.forms, csrf=flask.g.visitor.csrf, js_token=_JS_TOKEN)
        return body, status

    def see_other(path: str):
        return flask.redirect(path, code=303)

    @app.before_request
    def attach_visitor():
        sid = flask.request.cookies.get('sid', '')
        with visitors_lock:
            visitor = visitors.get(sid)
            if visitor is None:
                sid = secrets.token_hex(16)
                visitor = visitors[sid] = _Visitor(csrf=secrets.token_hex(8))
                flask.g.new_sid = True
        flask.g.sid, flask.g.visitor = sid, visitor
        record(RequestRecord(flask.request.method, flask.request.path, sid))

    @app.after_request
    def set_sid(response):
        if flask.g.get('new_sid'):
            response.set_cookie('sid', flask.g.sid, httponly=True,
                                samesite='Lax')
        return response

    @app.post('/login')
    def login():
        visitor = flask.g.visitor
        form = flask.request.form
        with state.lock:
            accepted = (form.get('csrf') == visitor.csrf and
                        form.get('username') == spec.account.username and
                        form.get('password') == state.password)
        if not accepted:
            return render(spec.pages[spec.entry_path],
                          message='Invalid password or username.')
        if visitor.authenticated:
            visitor.reauthed = True
        visitor.authenticated = True
        target = form.get('next') or spec.home_path
        if target not in spec.pages:
            target = spec.home_path
        return see_other(target)

    @app.get(site_spec.LOGOUT_PATH)
    def logout():
        visitor = flask.g.visitor
        visitor.authenticated = visitor.reauthed = False
        return see_other(spec.entry_path)

    @app.get('/search')
    def search():
        if not flask.g.visitor.authenticated:
            return see_other(spec.entry_path)
        page = site_spec.PageSpec(
            title='Search', links=(site_spec.LinkSpec('Home', spec.home_path),))
        return render(page, message='No results.')

    def reset():
        visitor = flask.g.visitor
        page = spec.pages[spec.reset_path]
        form_spec = spec.reset_form
        form = flask.request.form
        if form.get('csrf') != visitor.csrf:
            return render(page, message='Error: session expired.', status=400)
        if form_spec.js_token and form.get('js_token') != _JS_TOKEN:
            return render(page, message='Error: please type your new password.')
        new_password = form.get('new_password', '')
        with state.lock:
            if (form_spec.behavior == 'reset' and
                    form.get('current_password') != state.password):
                return render(page,
                              message='Error: current password is wrong.')
            if not new_password or new_password != form.get('confirm_password'):
                return render(page,
                              message='Error: the new passwords do not match.')
            state.password = new_password
            state.reset_count += 1
        visitor.reauthed = False
        logging.info('Simulated site %s-%d changed its password',
                     spec.category, spec.seed)
        return render(site_spec.PageSpec(
            title='Password changed',
            links=(site_spec.LinkSpec('Home', spec.home_path),)),
            message='Your password has been changed.')

    @app.route('/', defaults={'path': ''}, methods=['GET', 'POST'])
    @app.route('/<path:path>', methods=['GET', 'POST'])
    def dispatch(path: str):
        path = '/' + path
        visitor = flask.g.visitor
        if path == spec.entry_path:
            return render(spec.pages[path])
        if path not in spec.pages:
            return render(not_found, status=404)
        if not visitor.authenticated:
            return see_other(spec.entry_path)
        if path == spec.reset_path:
            if gate_path is not None and not visitor.reauthed:
                return see_other(gate_path)
            if flask.request.method == 'POST':
                return reset()
        elif flask.request.method == 'POST':
            flask.abort(405)
        return render(spec.pages[path])

    return app


class _QuietHandler(serving.WSGIRequestHandler):

    def log_request(self, code='-', size='-'):
        logging.debug('sim %s %s -> %s', self.command, self.path, code)


class SiteServer:
    """Handle to a site served on a background thread."""

    def __init__(self, spec: site_spec.SiteSpec, state: SiteState, host: str,
                 port: int):
        self.spec = spec
        self.state = state
        self._log: list[RequestRecord] = []
        self._log_lock = threading.Lock()
        app = create_app(spec, state, record=self._record)
        try:
            self._server = serving.make_server(
                host, port, app, threaded=True, request_handler=_QuietHandler)
        except (OSError, SystemExit) as e:
            # Werkzeug exits instead of raising when the port is taken.
            raise BindFailure(f'Cannot listen on {host}:{port}') from e
        self.host = host
        self.port = self._server.socket.getsockname()[1]
        self._thread = threading.Thread(
            target=self._server.serve_forever, name=f'sim-{self.port}',
            daemon=True)
        self._thread.start()
        logging.info('Serving %s site (seed %d) at %s', spec.category,
                     spec.seed, self.url)

    def _record(self, entry: RequestRecord) -> None:
        with self._log_lock:
            self._log.append(entry)

    @property
    def url(self) -> str:
        return f'http://{self.host}:{self.port}'

    @property
    def entry_url(self) -> str:
        return self.url + self.spec.entry_path

    @property
    def requests(self) -> list[RequestRecord]:
        with self._log_lock:
            return list(self._log)

    def clear_requests(self) -> None:
        with self._log_lock:
            self._log.clear()

    def wait(self) -> None:
        self._thread.join()

    def shutdown(self) -> None:
        if not self._thread.is_alive():
            return
        self._server.shutdown()
        self._thread.join()
        self._server.server_close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.shutdown()


def serve_site(
    spec: site_spec.SiteSpec,
    port: int = 0,
    host: str = '127.0.0.1',
) -> SiteServer:
    """Starts serving `spec`; port 0 picks a free port.

    Raises:
      BindFailure: If the port cannot be bound.
    """
    return SiteServer(spec, SiteState(password=spec.account.password), host,
                      port)
