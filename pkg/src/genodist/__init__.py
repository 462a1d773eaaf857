"""genodist: inter-word distance distributions of genomic words and
reverse-complement symmetry analysis."""

from .analysis import (PairRecord, RankTable, average_ranks, classify_pairs,
                       group_by_chromosome, locate_favored,
                       nearest_rank_threshold, pair_records, percentile_select,
                       rank_similar_unexpected, rank_table, spearman,
                       spearman_matrix, top_overlap)
from .config import RunConfig, __version__
from .errors import (ConfigError, EncodingError, FastaFormatError,
                     GenodistError, InsufficientDataError, StoreError)
from .fasta import (ChromosomeRecord, Segment, iter_fasta, iter_segments,
                    open_sequence_file, parse_fasta, segmentize)
from .measures import (DistanceDistribution, Peak, PeakConfig, apr, euclidean,
                       find_peaks, jeffreys, mean_distribution,
                       peak_dissimilarity, peak_pair_dissim, to_distribution)
from .reference import (BaseFrequencies, PatternAutomaton, build_automaton,
                        first_return_probabilities, reference_distribution,
                        rs_score)
from .report import dump_distribution, write_bed, write_reports
from .scan import (CountStore, DistanceHistogram, WordId, decode_word,
                   encode_word, load_store, merge_stores, reverse_complement,
                   reverse_complement_codes, revcomp_text, save_store,
                   scan_segment, scan_segments)
