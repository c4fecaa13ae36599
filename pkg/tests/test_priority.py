"""Tests for anchor-text scoring and ranking."""

import random

import pytest

from rekey import page_model
from rekey import priority


def _link(text, href=None):
    return page_model.LinkRef(text=text, href=href or f'https://s.test/{text}')


@pytest.fixture
def table():
    return priority.default_table()


class TestScoreLink:

    @pytest.mark.parametrize(
        'text, expected',
        [
            ('Privacy', 0),
            ('Settings', 1),
            ('My Profile', 2),
            ('ACCOUNT', 3),
            ('Security', 4),
            ('Preferences', 5),
            ('My login', 6),
            ('Edit profile', 7),
            ('Password', 8),
            ('Change Password', 100),
        ],
    )
    def test_default_table(self, table, text, expected):
        assert priority.score_link(_link(text), table).priority == expected

    def test_highest_matching_pattern_wins(self, table):
        scored = priority.score_link(_link('Account security settings'), table)
        assert scored.priority == 4

    def test_unmatched_text_is_not_a_candidate(self, table):
        assert priority.score_link(_link('Help center'), table) is None
        assert priority.score_link(_link(''), table) is None


class TestRankLinks:

    def test_priority_then_document_order(self, table):
        links = [_link('Privacy'), _link('Settings', 'https://s.test/s1'),
                 _link('Security'), _link('Settings', 'https://s.test/s2'),
                 _link('News')]
        ranked = priority.rank_links(links, table)
        assert [(s.link.text, s.doc_index) for s in ranked] == [
            ('Security', 2), ('Settings', 1), ('Settings', 3), ('Privacy', 0)]

    def test_visited_links_are_dropped(self, table):
        links = [_link('Password', 'https://s.test/p'), _link('Account')]
        ranked = priority.rank_links(links, table,
                                     visited={'https://s.test/p'})
        assert [s.link.text for s in ranked] == ['Account']

    def test_empty(self, table):
        assert priority.rank_links([], table) == []

    @pytest.mark.parametrize('seed', range(25))
    def test_unmatched_links_never_change_ranking(self, table, seed):
        rng = random.Random(seed)
        matched = ('Privacy', 'Settings', 'My profile', 'Account', 'Security',
                   'Preferences', 'My login', 'Edit profile', 'Password',
                   'Change password')
        unmatched = ('News', 'Help center', 'Contact us', 'Blog', '')
        links = [_link(rng.choice(matched), f'https://s.test/m{i}')
                 for i in range(rng.randint(0, 15))]
        before = [s.link.href for s in priority.rank_links(links, table)]
        for j in range(rng.randint(1, 5)):
            links.insert(rng.randint(0, len(links)),
                         _link(rng.choice(unmatched), f'https://s.test/u{j}'))
        after = [s.link.href for s in priority.rank_links(links, table)]
        assert after == before


class TestPriorityTable:

    def test_rejects_duplicates(self):
        with pytest.raises(priority.PriorityTableError):
            priority.PriorityTable.from_pairs([('a', 1), ('a', 2)])

    def test_rejects_uppercase(self):
        with pytest.raises(priority.PriorityTableError):
            priority.PriorityTable.from_pairs([('Password', 1)])

    def test_lookup(self, table):
        assert table.lookup('change password') == 100
        assert table.lookup('nope') is None

    def test_load_and_dump(self, tmp_path, table):
        path = tmp_path / 'table.tsv'
        path.write_text('# custom\n' + priority.dump_table(table)
                        + 'credentials\t9\n')
        loaded = priority.load_table(path)
        assert loaded.entries[:len(table.entries)] == table.entries
        assert loaded.lookup('credentials') == 9
        scored = priority.score_link(_link('My credentials'), loaded)
        assert scored.priority == 9

    def test_load_rejects_bad_priority(self, tmp_path):
        path = tmp_path / 'table.tsv'
        path.write_text('password\thigh\n')
        with pytest.raises(priority.PriorityTableError, match='bad priority'):
            priority.load_table(path)

    def test_load_rejects_missing_tab(self, tmp_path):
        path = tmp_path / 'table.tsv'
        path.write_text('password 8\n')
        with pytest.raises(priority.PriorityTableError, match='expected a tab'):
            priority.load_table(path)
