"""Ratio catalog: margins, multiples, leverage and coverage.

Value multiples must not mix levels: an enterprise-value numerator goes
over a pre-interest metric (revenue, EBITDA, EBIT) and an equity-value
numerator over an after-interest one (earnings, cash flow, book value).
The catalog encodes each ratio's pairing and is checked at import.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Mapping, Optional

from .errors import NonPositiveSharesError
from .statements import FinancialSnapshot, market_capitalization, net_debt

REASON_MISSING = "missing-input"
REASON_DENOMINATOR = "non-positive-denominator"

Numerator = Literal["enterprise", "equity", "metric"]
InterestBasis = Literal["pre-interest", "after-interest", "n/a"]


@dataclass(frozen=True)
class RatioSet:
    """Computed ratios; an absent field carries a reason code in ``reasons``."""

    roe: Optional[float] = None
    gross_margin: Optional[float] = None
    ebitda_margin: Optional[float] = None
    ebit_margin: Optional[float] = None
    net_income_margin: Optional[float] = None
    pe: Optional[float] = None
    price_to_cash_flow: Optional[float] = None
    price_to_book: Optional[float] = None
    ev_to_revenue: Optional[float] = None
    ev_to_ebitda: Optional[float] = None
    ev_to_ebit: Optional[float] = None
    net_debt_to_cap_book: Optional[float] = None
    net_debt_to_cap_market: Optional[float] = None
    ebitda_to_interest: Optional[float] = None
    ebitda_minus_capex_to_interest: Optional[float] = None
    total_debt_to_ebitda: Optional[float] = None
    reasons: Mapping[str, str] = field(default_factory=dict)


class _Inputs:
    """Resolved raw values for one snapshot; None marks anything unavailable."""

    def __init__(self, s: FinancialSnapshot, ev: Optional[float]):
        self.s = s
        self.ev = ev
        self.net_debt = net_debt(s)
        try:
            self.market_cap: Optional[float] = market_capitalization(s, "fully-diluted")
        except NonPositiveSharesError:
            self.market_cap = None
        d = (s.short_term_debt, s.long_term_debt, s.capitalized_leases)
        self.total_debt: Optional[float] = None if all(x is None for x in d) else sum(x or 0.0 for x in d)
        ebitda, capex = s.ebitda, s.capex
        self.ebitda_minus_capex = None if ebitda is None or capex is None else ebitda - capex


@dataclass(frozen=True)
class RatioRule:
    name: str
    numerator_level: Numerator
    denominator_basis: InterestBasis
    numerator: Callable[[_Inputs], Optional[float]]
    denominator: Callable[[_Inputs], Optional[float]]


RATIO_CATALOG: tuple[RatioRule, ...] = (
    RatioRule("roe", "metric", "n/a", lambda i: i.s.net_income, lambda i: i.s.common_equity),
    RatioRule("gross_margin", "metric", "n/a", lambda i: i.s.gross_profit, lambda i: i.s.revenue),
    RatioRule("ebitda_margin", "metric", "n/a", lambda i: i.s.ebitda, lambda i: i.s.revenue),
    RatioRule("ebit_margin", "metric", "n/a", lambda i: i.s.ebit, lambda i: i.s.revenue),
    RatioRule("net_income_margin", "metric", "n/a", lambda i: i.s.net_income, lambda i: i.s.revenue),
    RatioRule("pe", "equity", "after-interest", lambda i: i.s.share_price, lambda i: i.s.eps_diluted),
    RatioRule(
        "price_to_cash_flow", "equity", "after-interest",
        lambda i: i.s.share_price, lambda i: i.s.cash_flow_per_share,
    ),
    RatioRule(
        "price_to_book", "equity", "after-interest",
        lambda i: i.s.share_price, lambda i: i.s.book_value_per_share,
    ),
    RatioRule("ev_to_revenue", "enterprise", "pre-interest", lambda i: i.ev, lambda i: i.s.revenue),
    RatioRule("ev_to_ebitda", "enterprise", "pre-interest", lambda i: i.ev, lambda i: i.s.ebitda),
    RatioRule("ev_to_ebit", "enterprise", "pre-interest", lambda i: i.ev, lambda i: i.s.ebit),
    RatioRule(
        "net_debt_to_cap_book", "metric", "n/a",
        lambda i: i.net_debt,
        lambda i: None if i.s.common_equity is None else i.net_debt + i.s.common_equity,
    ),
    RatioRule(
        "net_debt_to_cap_market", "metric", "n/a",
        lambda i: i.net_debt,
        lambda i: None if i.market_cap is None else i.net_debt + i.market_cap,
    ),
    RatioRule("ebitda_to_interest", "metric", "n/a", lambda i: i.s.ebitda, lambda i: i.s.interest_expense),
    RatioRule(
        "ebitda_minus_capex_to_interest", "metric", "n/a",
        lambda i: i.ebitda_minus_capex, lambda i: i.s.interest_expense,
    ),
    RatioRule("total_debt_to_ebitda", "metric", "n/a", lambda i: i.total_debt, lambda i: i.s.ebitda),
)


def _check_catalog() -> None:
    # mixed-level multiples are a construction bug, not a data problem
    for rule in RATIO_CATALOG:
        if rule.numerator_level == "enterprise" and rule.denominator_basis != "pre-interest":
            raise AssertionError(f"{rule.name}: enterprise numerator over {rule.denominator_basis} denominator")
        if rule.numerator_level == "equity" and rule.denominator_basis != "after-interest":
            raise AssertionError(f"{rule.name}: equity numerator over {rule.denominator_basis} denominator")


_check_catalog()


def compute_ratios(s: FinancialSnapshot, ev: Optional[float] = None) -> RatioSet:
    """Evaluate every catalog ratio that has its inputs.

    A ratio is absent when an input is missing (reason ``missing-input``)
    or its denominator is not strictly positive (reason
    ``non-positive-denominator``, covering non-meaningful multiples such
    as EV over negative EBITDA). Zero numerators are legitimate zeros.
    """
    inputs = _Inputs(s, ev)
    values: dict[str, Optional[float]] = {}
    reasons: dict[str, str] = {}
    for rule in RATIO_CATALOG:
        num = rule.numerator(inputs)
        den = rule.denominator(inputs)
        if num is None or den is None:
            reasons[rule.name] = REASON_MISSING
        elif den <= 0:
            reasons[rule.name] = REASON_DENOMINATOR
        else:
            values[rule.name] = num / den
    return RatioSet(**values, reasons=reasons)
