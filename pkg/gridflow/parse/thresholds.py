"""The parser's entire tuning surface."""

# Euclidean RGB distance within which a pixel belongs to a colour class.
INK_TAU = 60.0

# Fraction of a cell's central region (or of a boundary window) that must be inked.
CELL_COVERAGE = 0.25

# TSP edges: samples on the open segment, how many must be inked, and the
# radius around each city centre that is skipped.
EDGE_SAMPLES = 9
EDGE_MIN_INKED = 7
CITY_EXCLUSION_PX = 6

# Largest Hamming distance (in 5x7 bits) still read as a digit.
GLYPH_SLACK_BITS = 10

# Mean squared pixel-channel distance above which a jigsaw match is flagged.
JIGSAW_LOW_CONFIDENCE = 1500.0
