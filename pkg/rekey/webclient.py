# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Origin-bound HTTP session: cookies, redirects and form submission."""

from collections.abc import Mapping
import dataclasses
from urllib import parse

from absl import logging
import requests

from rekey import config
from rekey import page_model
from rekey import urls

# Statuses after which the follow-up request becomes a body-less GET.
_SEE_OTHER = (301, 302, 303)


class NetworkError(Exception):
    """Transport-level failure."""


class RedirectLoop(NetworkError):
    """More redirects than the session allows."""


class FetchTimeout(NetworkError):
    """The server did not answer in time."""


class CrossOriginRefused(NetworkError):
    """A request or redirect left the session's origin."""


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class FetchResult:
    final_url: str
    status: int
    body: bytes
    content_type: str = ''

    def to_page(self) -> page_model.PageDocument:
        return page_model.parse_page(self.body, self.final_url)


class Session:
    """HTTP session confined to one origin.

    Cookies live in memory for the lifetime of the session. Any request or
    redirect to another origin is refused before it is sent, so cookies are
    never transmitted cross-origin.
    """

    def __init__(
        self,
        origin: str,
        *,
        http: requests.Session | None = None,
        redirect_limit: int | None = None,
        timeout: float | None = None,
    ):
        self.origin = urls.normalize_origin(origin)
        self.http = http or requests.Session()
        self.http.headers['User-Agent'] = config.user_agent
        self.redirect_limit = (config.redirect_limit if redirect_limit is None
                               else redirect_limit)
        self.timeout = config.request_timeout if timeout is None else timeout

    def close(self) -> None:
        self.http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def _check_origin(self, url: str) -> None:
        if not urls.same_origin(self.origin, url):
            raise CrossOriginRefused(
                f'{url!r} is outside session origin {self.origin}')

    def _send(self, method: str, url: str, **kwargs) -> requests.Response:
        try:
            return self.http.request(method, url, allow_redirects=False,
                                     timeout=self.timeout, **kwargs)
        except requests.Timeout as e:
            raise FetchTimeout(f'{method} {url} timed out') from e
        except requests.RequestException as e:
            raise NetworkError(f'{method} {url} failed: {e}') from e

    def request(
        self,
        method: str,
        url: str,
        *,
        params: list[tuple[str, str]] | None = None,
        data: list[tuple[str, str]] | None = None,
    ) -> FetchResult:
        """Sends a request and follows redirects within the origin.

        Raises:
          CrossOriginRefused: If `url` or a redirect target is off-origin.
          RedirectLoop: If more than `redirect_limit` redirects occur.
          FetchTimeout: If the server does not answer in time.
          NetworkError: On any other transport failure.
        """
        self._check_origin(url)
        for hop in range(self.redirect_limit + 1):
            response = self._send(method, url, params=params, data=data)
            if not response.is_redirect:
                logging.debug('%s %s -> %d', method, response.url,
                              response.status_code)
                return FetchResult(
                    final_url=response.url,
                    status=response.status_code,
                    body=response.content,
                    content_type=response.headers.get('Content-Type', ''),
                )
            if hop == self.redirect_limit:
                break
            try:
                url = parse.urljoin(response.url,
                                    response.headers.get('Location', ''))
            except ValueError as e:
                raise NetworkError(
                    f'Bad redirect from {response.url}: {e}') from e
            self._check_origin(url)
            if response.status_code in _SEE_OTHER:
                method, data = 'GET', None
            # The query string is already part of the redirect target.
            params = None
        raise RedirectLoop(
            f'More than {self.redirect_limit} redirects from {url}')

    def fetch(self, url: str) -> FetchResult:
        return self.request('GET', url)

    def submit_form(
        self,
        form: page_model.FormModel,
        values: Mapping[str, str],
    ) -> FetchResult:
        """Submits `form` with `values` overriding page-supplied values.

        Controls are encoded in document order. Hidden fields keep their page
        values unless overridden; only the first named submit control is sent.

        Raises:
          ValueError: If a key of `values` names no field of the form.
          NetworkError: As for `request`.
        """
        names = {f.name for f in form.fields if f.name}
        unknown = set(values) - names
        if unknown:
            raise ValueError(f'Unknown form fields: {sorted(unknown)}')

        pairs = []
        submitted = False
        for field in form.fields:
            if not field.name:
                continue
            if field.kind == page_model.FieldKind.SUBMIT:
                if submitted:
                    continue
                submitted = True
            pairs.append((field.name, values.get(field.name, field.value)))

        if form.method == 'POST':
            return self.request('POST', form.action_url, data=pairs)
        return self.request('GET', form.action_url, params=pairs)
