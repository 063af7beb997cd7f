"""
lakeice

Lake ice phenology from optical satellite pixels: per-pixel frozen/non-frozen
classification, per-winter timelines, robust extraction of the freeze-up and
break-up dates, multi-winter trends and climate correlations.
"""

__version__ = "0.1.0"
