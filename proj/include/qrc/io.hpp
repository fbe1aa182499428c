#pragma once

// JSON and CSV forms of the domain types, plus validators the CLI's own
// output is checked against.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qrc/bloch.hpp"
#include "qrc/certifier.hpp"
#include "qrc/channel.hpp"
#include "qrc/decoy.hpp"

namespace qrc {

using Json = nlohmann::json;

/// Input or output that does not match its schema. Carries a JSON-pointer-like path.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses text as JSON, converting parse failures into SchemaError.
Json parse_json(std::string_view text);

/// {"q0": 4x2 of numbers or [lo, hi] pairs}
ObservationTable observation_table_from_json(const Json& j);
Json to_json(const ObservationTable& t);

/// {"e0", "e1", "e2", "e3", "p20", "p30"}: each a number or a [lo, hi] pair.
QberBox qber_box_from_json(const Json& j);
/// Point form; throws SchemaError if any entry is an interval.
QberSet qber_set_from_json(const Json& j);
Json to_json(const QberSet& q);

/// {"loss_db", "eta_d", "p_dark", "d_e"}; missing keys take the defaults.
ChannelParams channel_params_from_json(const Json& j);
Json to_json(const ChannelParams& p);

/// [{"mu": ..., "q0": [[...]]}, ...]
std::vector<DecoyObservation> decoy_observations_from_json(const Json& j);
Json to_json(const std::vector<DecoyObservation>& obs);

/// {"lo": 4x2, "hi": 4x2}
PhotonBounds photon_bounds_from_json(const Json& j);
Json to_json(const PhotonBounds& b);

Json to_json(const Strategy& s);

struct OracleCheck {
    std::optional<double> oracle_p_bar;  // nullopt: no feasible grid point
    int resolution = 0;
};

/// Certificate label written next to every entropy figure.
std::string certificate_label(const std::optional<OracleCheck>& check);

/// Result object. With an oracle check the reported p_bar is the larger of
/// the solver and oracle values (both are attained by feasible strategies)
/// and oracle_gap = oracle - solver; otherwise oracle_gap is null.
Json certification_json(const CertificationResult& r, const std::optional<OracleCheck>& check);

/// Throws SchemaError unless j has the shape written by certification_json.
void validate_certification_json(const Json& j);
/// Same for the decoy command's output.
void validate_decoy_json(const Json& j);

struct SweepRow {
    double x = 0.0;
    double p_bar = 1.0;
    double h_min_bits = 0.0;
    std::string status;
};

inline constexpr std::string_view kSweepHeader = "x,p_bar,h_min_bits,status";

/// Nine significant digits with a '.' decimal point regardless of locale.
std::string format_number(double v);

/// Comment lines start with '#'; then the header, then rows. Throws
/// SchemaError on a bad header, bad number, unknown status, or x not
/// strictly increasing.
std::vector<SweepRow> parse_sweep_csv(std::string_view text);

}  // namespace qrc
