"""
Event candidates from the smoothed timeline

A day is a candidate when its value reaches a threshold that the previous
admitted day did not reach:

    FUS  frozen >= 30%      FUE  frozen >= 70%
    BUS  non-frozen >= 30%  BUE  non-frozen >= 70%
"""

from pydantic import BaseModel, Field

from lakeice.core.models import LipEvent, WinterTimeline

LOW_THRESHOLD = 30.0
HIGH_THRESHOLD = 70.0


class EventCandidates(BaseModel):
    """Candidate day indices per event, ascending"""

    fus: list[int] = Field(default_factory=list)
    fue: list[int] = Field(default_factory=list)
    bus: list[int] = Field(default_factory=list)
    bue: list[int] = Field(default_factory=list)

    def of(self, event: LipEvent) -> list[int]:
        return getattr(self, event.field)

    def counts(self) -> dict[str, int]:
        return {"fus": len(self.fus), "fue": len(self.fue), "bus": len(self.bus), "bue": len(self.bue)}


def extract_candidates(tl: WinterTimeline) -> EventCandidates:
    """Apply the threshold rules to each point against the previous admitted point"""
    out = EventCandidates()
    for prev, cur in zip(tl.points, tl.points[1:], strict=False):
        if cur.frozen_percent >= LOW_THRESHOLD > prev.frozen_percent:
            out.fus.append(cur.day)
        if cur.frozen_percent >= HIGH_THRESHOLD > prev.frozen_percent:
            out.fue.append(cur.day)
        if cur.nf_percent >= LOW_THRESHOLD > prev.nf_percent:
            out.bus.append(cur.day)
        if cur.nf_percent >= HIGH_THRESHOLD > prev.nf_percent:
            out.bue.append(cur.day)
    return out
