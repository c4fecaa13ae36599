# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Neutral page representation and the form/login heuristics built on it."""

import collections
import dataclasses
import enum
from urllib import parse

import bs4

from rekey import urls
from rekey.constants import patterns


class FieldKind(enum.Enum):
    TEXT = 'text'
    PASSWORD = 'password'
    SUBMIT = 'submit'
    HIDDEN = 'hidden'
    OTHER = 'other'


class FormClass(enum.Enum):
    LOGIN = 'Login'
    RESET = 'Reset'
    OTHER = 'Other'


# input[type] -> kind. Anything missing from the table is OTHER.
_INPUT_KINDS = {
    'text': FieldKind.TEXT,
    'email': FieldKind.TEXT,
    'tel': FieldKind.TEXT,
    'search': FieldKind.TEXT,
    'url': FieldKind.TEXT,
    'password': FieldKind.PASSWORD,
    'submit': FieldKind.SUBMIT,
    'image': FieldKind.SUBMIT,
    'hidden': FieldKind.HIDDEN,
}

_INVISIBLE_TAGS = ['script', 'style', 'noscript', 'template', 'head']


@dataclasses.dataclass(frozen=True, slots=True)
class FormField:
    """One control of a form, in document order."""

    name: str
    kind: FieldKind
    # Page-supplied value; hidden fields are submitted with it.
    value: str = ''


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class FormModel:
    """A form with its action resolved against the page URL.

    Attributes:
      index: Position of the form among the page's forms.
      action_url: Absolute submission URL.
      method: 'GET' or 'POST'.
      fields: Controls in document order.
    """

    index: int
    action_url: str
    method: str
    fields: tuple[FormField, ...]

    def kinds(self) -> tuple[FieldKind, ...]:
        return tuple(f.kind for f in self.fields)

    def fields_of(self, kind: FieldKind) -> tuple[FormField, ...]:
        return tuple(f for f in self.fields if f.kind == kind)


@dataclasses.dataclass(frozen=True, slots=True)
class LinkRef:
    text: str
    href: str


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class PageDocument:
    """A fetched page reduced to what the navigator needs.

    Attributes:
      final_url: Absolute URL after redirects.
      forms: Forms in document order.
      links: `a[href]` links in document order.
      body_text: Lowercased visible text.
    """

    final_url: str
    forms: tuple[FormModel, ...] = ()
    links: tuple[LinkRef, ...] = ()
    body_text: str = ''


def _squash(text: str) -> str:
    return ' '.join(text.split())


def _field_from_tag(tag: bs4.Tag) -> FormField | None:
    name = tag.get('name') or ''
    value = tag.get('value') or ''
    if tag.name == 'input':
        kind = _INPUT_KINDS.get((tag.get('type') or 'text').strip().lower(),
                                FieldKind.OTHER)
    elif tag.name == 'button':
        # An untyped button submits its form.
        button_type = (tag.get('type') or 'submit').strip().lower()
        kind = FieldKind.SUBMIT if button_type == 'submit' else FieldKind.OTHER
    elif tag.name in ('select', 'textarea'):
        kind = FieldKind.OTHER
        if tag.name == 'textarea':
            value = tag.get_text()
    else:
        return None
    return FormField(name=name, kind=kind, value=value)


def _resolve(base_url: str, ref: str) -> str | None:
    """Absolute, defragmented URL of `ref`; None if it cannot be parsed."""
    try:
        return parse.urldefrag(parse.urljoin(base_url, ref.strip())).url
    except ValueError:
        return None


def _parse_form(index: int, tag: bs4.Tag, base_url: str) -> FormModel | None:
    action_url = _resolve(base_url, tag.get('action') or '')
    if action_url is None:
        return None
    method = (tag.get('method') or 'GET').strip().upper()
    if method not in ('GET', 'POST'):
        method = 'GET'
    fields = []
    for control in tag.find_all(['input', 'button', 'select', 'textarea']):
        field = _field_from_tag(control)
        if field is not None:
            fields.append(field)
    return FormModel(index=index, action_url=action_url, method=method,
                     fields=tuple(fields))


def _parse_link(tag: bs4.Tag, base_url: str) -> LinkRef | None:
    # Links wrapped in buttons are not followed.
    if tag.find_parent('button') is not None:
        return None
    href = _resolve(base_url, tag['href'])
    if href is None or not urls.is_absolute(href):
        return None
    return LinkRef(text=_squash(tag.get_text(' ')), href=href)


def parse_page(raw_html: bytes, base_url: str) -> PageDocument:
    """Parses a fetched document; never fails on malformed markup.

    Args:
      raw_html: Response body; invalid UTF-8 sequences are replaced.
      base_url: Absolute URL the body was served from, after redirects.

    Returns:
      The page's forms, links and visible text.

    Raises:
      ValueError: If `base_url` is not absolute.
    """
    if not urls.is_absolute(base_url):
        raise ValueError(f'base_url must be absolute: {base_url!r}')
    soup = bs4.BeautifulSoup(raw_html.decode('utf-8', errors='replace'),
                             'html.parser')

    forms = tuple(
        form for form in (_parse_form(i, tag, base_url)
                          for i, tag in enumerate(soup.find_all('form')))
        if form is not None)
    links = tuple(
        link for link in (_parse_link(tag, base_url)
                          for tag in soup.find_all('a', href=True))
        if link is not None)

    for tag in soup.find_all(_INVISIBLE_TAGS):
        if not tag.decomposed:
            tag.decompose()
    for comment in soup.find_all(string=lambda s: isinstance(s, bs4.Comment)):
        comment.extract()
    body_text = _squash(soup.get_text(' ')).lower()

    return PageDocument(final_url=base_url, forms=forms, links=links,
                        body_text=body_text)


def classify_form(form: FormModel) -> FormClass:
    """Classifies a form by the kinds and counts of its visible controls."""
    counts = collections.Counter(
        f.kind for f in form.fields if f.kind != FieldKind.HIDDEN)
    text = counts[FieldKind.TEXT]
    password = counts[FieldKind.PASSWORD]
    has_submit = counts[FieldKind.SUBMIT] > 0
    if not has_submit:
        return FormClass.OTHER
    if password == 1 and text >= 1:
        return FormClass.LOGIN
    if password == 3 and text <= 1:
        return FormClass.RESET
    return FormClass.OTHER


def _first_of_class(page: PageDocument, wanted: FormClass) -> FormModel | None:
    for form in page.forms:
        if classify_form(form) == wanted:
            return form
    return None


def find_login_form(page: PageDocument) -> FormModel | None:
    return _first_of_class(page, FormClass.LOGIN)


def find_reset_form(page: PageDocument) -> FormModel | None:
    return _first_of_class(page, FormClass.RESET)


def contains_any(page: PageDocument, needles) -> bool:
    return any(needle in page.body_text for needle in needles)


def detect_login_failure(page: PageDocument) -> bool:
    """True if a login submission evidently did not succeed.

    Sites usually re-present the login form on failure; some only show an
    error string.
    """
    if find_login_form(page) is not None:
        return True
    return contains_any(page, patterns.LOGIN_ERROR_STRINGS)
