#include "qrc/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

namespace qrc {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

const Json& member(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) {
        fail(path, "expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        fail(path, "missing key \"" + key + "\"");
    }
    return *it;
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) {
        fail(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        fail(path, "expected a finite number");
    }
    return v;
}

ProbabilityInterval interval(const Json& j, const std::string& path) {
    if (j.is_number()) {
        return ProbabilityInterval::point(number(j, path));
    }
    if (!j.is_array() || j.size() != 2) {
        fail(path, "expected a number or a [lo, hi] pair");
    }
    return {number(j[0], path + "/0"), number(j[1], path + "/1")};
}

Json interval_json(const ProbabilityInterval& iv) {
    if (iv.is_point()) {
        return iv.lo;
    }
    return Json::array({iv.lo, iv.hi});
}

template <class T, class F>
T rethrow_invalid(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

using PointGrid = std::array<std::array<double, kMeasurements>, kPreparations>;

PointGrid point_grid(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != kPreparations) {
        fail(path, "expected a 4x2 array");
    }
    PointGrid g{};
    for (std::size_t x = 0; x < kPreparations; ++x) {
        const std::string row_path = path + "/" + std::to_string(x);
        if (!j[x].is_array() || j[x].size() != kMeasurements) {
            fail(row_path, "expected 2 entries");
        }
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            g[x][y] = number(j[x][y], row_path + "/" + std::to_string(y));
        }
    }
    return g;
}

Json grid_json(const PointGrid& g) {
    Json out = Json::array();
    for (const auto& row : g) {
        out.push_back(Json::array({row[0], row[1]}));
    }
    return out;
}

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

void expect_probability(const Json& j, const std::string& key, const std::string& path) {
    const double v = number(member(j, key, path), path + "/" + key);
    if (v < 0.0 || v > 1.0) {
        fail(path + "/" + key, "must lie in [0,1]");
    }
}

void expect_nonnegative(const Json& j, const std::string& key, const std::string& path) {
    if (number(member(j, key, path), path + "/" + key) < 0.0) {
        fail(path + "/" + key, "must be >= 0");
    }
}

void expect_status(const Json& j, const std::string& path) {
    const Json& s = member(j, "status", path);
    if (!s.is_string()) {
        fail(path + "/status", "expected a string");
    }
    const auto v = s.get<std::string>();
    if (v != "certified" && v != "infeasible" && v != "degenerate") {
        fail(path + "/status", "unknown status \"" + v + "\"");
    }
}

void expect_unit_vector(const Json& j, const std::string& path, double max_norm) {
    if (!j.is_array() || j.size() != 3) {
        fail(path, "expected a 3-vector");
    }
    const Vec3 v{number(j[0], path), number(j[1], path), number(j[2], path)};
    if (norm(v) > max_norm + 1e-9) {
        fail(path, "vector leaves the unit ball");
    }
}

void validate_strategy(const Json& j, const std::string& path) {
    const Json& meas = member(j, "measurements", path);
    if (!meas.is_array() || meas.size() != kMeasurements) {
        fail(path + "/measurements", "expected 2 entries");
    }
    for (std::size_t y = 0; y < kMeasurements; ++y) {
        const std::string p = path + "/measurements/" + std::to_string(y);
        if (meas[y].is_null()) {
            continue;
        }
        for (const char* k : {"m", "u0", "u1"}) {
            expect_probability(meas[y], k, p);
        }
        expect_unit_vector(member(meas[y], "axis", p), p + "/axis", 1.0);
    }
    const Json& states = member(j, "states", path);
    if (!states.is_array() || states.size() != kPreparations) {
        fail(path + "/states", "expected 4 entries");
    }
    for (std::size_t x = 0; x < kPreparations; ++x) {
        if (!states[x].is_null()) {
            expect_unit_vector(states[x], path + "/states/" + std::to_string(x), 1.0);
        }
    }
    const Json& decs = member(j, "decompositions", path);
    if (!decs.is_array() || decs.size() != kPreparations) {
        fail(path + "/decompositions", "expected 4 rows");
    }
    for (std::size_t x = 0; x < kPreparations; ++x) {
        const std::string row = path + "/decompositions/" + std::to_string(x);
        if (!decs[x].is_array() || decs[x].size() != kMeasurements) {
            fail(row, "expected 2 entries");
        }
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            const std::string p = row + "/" + std::to_string(y);
            if (decs[x][y].is_null()) {
                continue;
            }
            expect_probability(decs[x][y], "q1", p);
            expect_probability(decs[x][y], "q2", p);
            expect_unit_vector(member(decs[x][y], "s1", p), p + "/s1", 1.0);
            expect_unit_vector(member(decs[x][y], "s2", p), p + "/s2", 1.0);
        }
    }
}

void validate_bounds_json(const Json& j, const std::string& path) {
    const auto lo = point_grid(member(j, "lo", path), path + "/lo");
    const auto hi = point_grid(member(j, "hi", path), path + "/hi");
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            if (!(0.0 <= lo[x][y] && lo[x][y] <= hi[x][y] && hi[x][y] <= 1.0)) {
                fail(path, "bounds must satisfy 0 <= lo <= hi <= 1");
            }
        }
    }
}

bool known_sweep_status(std::string_view s) {
    return s == "certified" || s == "degenerate" || s == "infeasible" || s == "clipped";
}

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw SchemaError("line " + std::to_string(line) + ": bad number \"" + std::string(field) + "\"");
    }
    return v;
}

}  // namespace

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
}

ObservationTable observation_table_from_json(const Json& j) {
    const Json& q0 = member(j, "q0", "");
    if (!q0.is_array() || q0.size() != kPreparations) {
        fail("/q0", "expected a 4x2 array");
    }
    ObservationTable::Grid g{};
    for (std::size_t x = 0; x < kPreparations; ++x) {
        const std::string row = "/q0/" + std::to_string(x);
        if (!q0[x].is_array() || q0[x].size() != kMeasurements) {
            fail(row, "expected 2 entries");
        }
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            g[x][y] = interval(q0[x][y], row + "/" + std::to_string(y));
        }
    }
    return rethrow_invalid<ObservationTable>("/q0", [&] { return ObservationTable(g); });
}

Json to_json(const ObservationTable& t) {
    Json q0 = Json::array();
    for (const auto& row : t.entries()) {
        q0.push_back(Json::array({interval_json(row[0]), interval_json(row[1])}));
    }
    return {{"q0", q0}};
}

QberBox qber_box_from_json(const Json& j) {
    auto get = [&](const char* k) { return interval(member(j, k, ""), std::string("/") + k); };
    QberBox box{get("e0"), get("e1"), get("e2"), get("e3"), get("p20"), get("p30")};
    rethrow_invalid<int>("", [&] {
        box.validate();
        return 0;
    });
    return box;
}

QberSet qber_set_from_json(const Json& j) {
    const QberBox box = qber_box_from_json(j);
    if (!box.is_point()) {
        fail("", "expected point values, got intervals");
    }
    QberSet q{box.e0.lo, box.e1.lo, box.e2.lo, box.e3.lo, box.p20.lo, box.p30.lo};
    rethrow_invalid<int>("", [&] {
        q.validate();
        return 0;
    });
    return q;
}

Json to_json(const QberSet& q) {
    return {{"e0", q.e0}, {"e1", q.e1}, {"e2", q.e2}, {"e3", q.e3}, {"p20", q.p20}, {"p30", q.p30}};
}

ChannelParams channel_params_from_json(const Json& j) {
    if (!j.is_object()) {
        fail("", "expected an object");
    }
    ChannelParams p;
    auto opt = [&](const char* k, double& field) {
        if (j.contains(k)) {
            field = number(j[k], std::string("/") + k);
        }
    };
    opt("loss_db", p.loss_db);
    opt("eta_d", p.eta_d);
    opt("p_dark", p.p_dark);
    opt("d_e", p.d_e);
    rethrow_invalid<int>("", [&] {
        p.validate();
        return 0;
    });
    return p;
}

Json to_json(const ChannelParams& p) {
    return {{"loss_db", p.loss_db}, {"eta_d", p.eta_d}, {"p_dark", p.p_dark}, {"d_e", p.d_e}};
}

std::vector<DecoyObservation> decoy_observations_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) {
        fail("", "expected a non-empty array of observations");
    }
    std::vector<DecoyObservation> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string path = "/" + std::to_string(i);
        const double mu = number(member(j[i], "mu", path), path + "/mu");
        if (!(mu > 0.0)) {
            fail(path + "/mu", "must be > 0");
        }
        try {
            out.push_back({mu, observation_table_from_json(j[i])});
        } catch (const SchemaError& e) {
            throw SchemaError(path + e.what());
        }
        if (!out.back().table.all_points()) {
            fail(path + "/q0", "decoy observations must be point values");
        }
    }
    return out;
}

Json to_json(const std::vector<DecoyObservation>& obs) {
    Json out = Json::array();
    for (const auto& o : obs) {
        Json item = to_json(o.table);
        item["mu"] = o.mu;
        out.push_back(item);
    }
    return out;
}

PhotonBounds photon_bounds_from_json(const Json& j) {
    validate_bounds_json(j, "");
    return {point_grid(j["lo"], "/lo"), point_grid(j["hi"], "/hi")};
}

Json to_json(const PhotonBounds& b) { return {{"lo", grid_json(b.lo)}, {"hi", grid_json(b.hi)}}; }

Json to_json(const Strategy& s) {
    Json meas = Json::array();
    for (const auto& m : s.meas) {
        if (m) {
            meas.push_back({{"m", m->m()}, {"u0", m->u0()}, {"u1", m->u1()}, {"axis", vec_json(m->axis().vec())}});
        } else {
            meas.push_back(nullptr);
        }
    }
    Json states = Json::array();
    for (const auto& st : s.states) {
        states.push_back(st ? vec_json(st->vec()) : Json(nullptr));
    }
    Json decs = Json::array();
    for (const auto& row : s.decs) {
        Json r = Json::array();
        for (const auto& d : row) {
            if (d) {
                r.push_back({{"q1", d->q1()},
                             {"s1", vec_json(d->s1().vec())},
                             {"q2", d->q2()},
                             {"s2", vec_json(d->s2().vec())}});
            } else {
                r.push_back(nullptr);
            }
        }
        decs.push_back(r);
    }
    return {{"measurements", meas}, {"states", states}, {"decompositions", decs}};
}

std::string certificate_label(const std::optional<OracleCheck>& check) {
    if (!check) {
        return "heuristic certificate, not validated (--no-oracle)";
    }
    return "heuristic certificate, validated against grid oracle (resolution " + std::to_string(check->resolution) +
           ")";
}

Json certification_json(const CertificationResult& r, const std::optional<OracleCheck>& check) {
    Json out;
    double p_bar = r.p_bar;
    Json gap = nullptr;
    if (check && r.status != CertStatus::infeasible) {
        if (check->oracle_p_bar) {
            gap = *check->oracle_p_bar - r.p_bar;
            p_bar = std::max(p_bar, *check->oracle_p_bar);
        }
        out["oracle_p_bar"] = check->oracle_p_bar ? Json(*check->oracle_p_bar) : Json(nullptr);
        out["oracle_resolution"] = check->resolution;
    }
    out["p_bar"] = p_bar;
    out["h_min_bits"] = r.status == CertStatus::infeasible ? 0.0 : min_entropy(p_bar);
    out["solver_p_bar"] = r.p_bar;
    out["status"] = std::string(to_string(r.status));
    out["oracle_gap"] = gap;
    out["certificate"] = certificate_label(check);
    out["entropy_is_upper_estimate"] = r.entropy_is_upper_estimate;
    Json pg = Json::array();
    for (const auto& row : r.p_guess) {
        Json jr = Json::array();
        for (const auto& v : row) {
            jr.push_back(v ? Json(*v) : Json(nullptr));
        }
        pg.push_back(jr);
    }
    out["p_guess"] = pg;
    out["strategy"] = to_json(r.strategy);
    out["evaluations"] = r.evaluations;
    return out;
}

void validate_certification_json(const Json& j) {
    expect_probability(j, "p_bar", "");
    expect_nonnegative(j, "h_min_bits", "");
    expect_probability(j, "solver_p_bar", "");
    expect_status(j, "");
    const Json& gap = member(j, "oracle_gap", "");
    if (!gap.is_null()) {
        number(gap, "/oracle_gap");
    }
    if (!member(j, "certificate", "").is_string()) {
        fail("/certificate", "expected a string");
    }
    if (!member(j, "entropy_is_upper_estimate", "").is_boolean()) {
        fail("/entropy_is_upper_estimate", "expected a boolean");
    }
    const Json& pg = member(j, "p_guess", "");
    if (!pg.is_array() || pg.size() != kPreparations) {
        fail("/p_guess", "expected 4 rows");
    }
    for (std::size_t x = 0; x < kPreparations; ++x) {
        if (!pg[x].is_array() || pg[x].size() != kMeasurements) {
            fail("/p_guess/" + std::to_string(x), "expected 2 entries");
        }
        for (const auto& v : pg[x]) {
            if (!v.is_null()) {
                number(v, "/p_guess/" + std::to_string(x));
            }
        }
    }
    validate_strategy(member(j, "strategy", ""), "/strategy");
    const double p = j["p_bar"].get<double>();
    const double h = j["h_min_bits"].get<double>();
    if (j["status"] != "infeasible" && (p <= 0.0 || std::abs(h - min_entropy(p)) > 1e-9)) {
        fail("/h_min_bits", "inconsistent with p_bar");
    }
}

void validate_decoy_json(const Json& j) {
    validate_bounds_json(member(j, "q1_bounds", ""), "/q1_bounds");
    expect_nonnegative(j, "h_min_single", "");
    expect_nonnegative(j, "bits_per_pulse", "");
    expect_probability(j, "p1_signal", "");
    if (number(member(j, "mu_signal", ""), "/mu_signal") <= 0.0) {
        fail("/mu_signal", "must be > 0");
    }
    if (j["bits_per_pulse"].get<double>() > j["p1_signal"].get<double>() * j["h_min_single"].get<double>() + 1e-12) {
        fail("/bits_per_pulse", "exceeds p1 * h_min_single");
    }
    validate_certification_json(member(j, "single_photon", ""));
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 9);
    return std::string(buf.data(), ptr);
}

std::vector<SweepRow> parse_sweep_csv(std::string_view text) {
    std::vector<SweepRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t n = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++n;
        if (!header_seen && !line.empty() && line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            if (line != kSweepHeader) {
                throw SchemaError("line " + std::to_string(n) + ": expected header " + std::string(kSweepHeader));
            }
            header_seen = true;
            continue;
        }
        std::array<std::string_view, 4> f;
        std::string_view rest = line;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto comma = rest.find(',');
            if ((k < 3) == (comma == std::string_view::npos)) {
                throw SchemaError("line " + std::to_string(n) + ": expected 4 fields");
            }
            f[k] = rest.substr(0, comma);
            rest = k < 3 ? rest.substr(comma + 1) : std::string_view{};
        }
        SweepRow r{parse_double(f[0], n), parse_double(f[1], n), parse_double(f[2], n), std::string(f[3])};
        if (!known_sweep_status(r.status)) {
            throw SchemaError("line " + std::to_string(n) + ": unknown status \"" + r.status + "\"");
        }
        if (r.p_bar < 0.0 || r.p_bar > 1.0 || r.h_min_bits < 0.0) {
            throw SchemaError("line " + std::to_string(n) + ": p_bar or h_min_bits out of range");
        }
        if (!rows.empty() && !(r.x > rows.back().x)) {
            throw SchemaError("line " + std::to_string(n) + ": x must be strictly increasing");
        }
        rows.push_back(std::move(r));
    }
    if (!header_seen) {
        throw SchemaError("missing CSV header");
    }
    return rows;
}

}  // namespace qrc
