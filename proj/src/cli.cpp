#include "qrc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "qrc/certifier.hpp"
#include "qrc/channel.hpp"
#include "qrc/decoy.hpp"
#include "qrc/io.hpp"
#include "qrc/oracle.hpp"

namespace qrc {

namespace {

// Raised for flag combinations CLI11 cannot express; maps to exit 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr int kDefaultBb84OracleResolution = 16;
constexpr int kDefaultGeneralOracleResolution = 64;

struct CommonFlags {
    std::uint64_t seed = 0;
    std::size_t starts = 64;
    std::string constraint_mode = "signed";
    bool oracle_check = false;
    bool no_oracle = false;
    int oracle_resolution = 0;
    std::string input = "-";
};

void add_common(CLI::App& cmd, CommonFlags& f, bool with_input) {
    cmd.add_option("--seed", f.seed, "Seed for the multi-start solver")->capture_default_str();
    cmd.add_option("--starts", f.starts, "Number of multi-start points")
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000}))
        ->capture_default_str();
    cmd.add_option("--constraint-mode", f.constraint_mode, "How S.T enters observed probabilities")
        ->check(CLI::IsMember({"signed", "printed-abs"}))
        ->capture_default_str();
    auto* check = cmd.add_flag("--oracle-check", f.oracle_check, "Cross-check the solver against the grid oracle");
    auto* skip = cmd.add_flag("--no-oracle", f.no_oracle, "Acknowledge an entropy without oracle cross-check");
    check->excludes(skip);
    cmd.add_option("--oracle-resolution", f.oracle_resolution, "Grid resolution (default: 16 bb84, 64 general)")
        ->check(CLI::Range(2, 512));
    if (with_input) {
        cmd.add_option("--input,-i", f.input, "JSON input file, '-' for stdin")->capture_default_str();
    }
}

SolverOptions solver_options(const CommonFlags& f, Exec exec) {
    SolverOptions o;
    o.starts = f.starts;
    o.seed = f.seed;
    o.mode = f.constraint_mode == "printed-abs" ? ConstraintMode::printed_abs : ConstraintMode::signed_born;
    o.exec = exec;
    return o;
}

void require_oracle_choice(const CommonFlags& f) {
    if (!f.oracle_check && !f.no_oracle) {
        throw UsageError(
            "refusing to report an entropy without --oracle-check; pass --no-oracle to accept an unvalidated "
            "solver result");
    }
}

std::string read_input(const std::string& path, std::istream& in) {
    if (path == "-") {
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
    std::ifstream file(path);
    if (!file) {
        throw UsageError("cannot open input file " + path);
    }
    return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

std::size_t parse_index(const std::string& s, std::size_t limit, const std::string& what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v >= limit) {
        throw UsageError("bad " + what + " index in --target: \"" + s + "\"");
    }
    return v;
}

// "x,y" or "x,y+x,y+..."
Target parse_target(const std::string& spec) {
    Target t;
    std::stringstream ss(spec);
    std::string pair;
    while (std::getline(ss, pair, '+')) {
        const auto comma = pair.find(',');
        if (comma == std::string::npos) {
            throw UsageError("--target expects x,y pairs joined by '+'");
        }
        t.pairs.push_back({parse_index(pair.substr(0, comma), kPreparations, "preparation"),
                           parse_index(pair.substr(comma + 1), kMeasurements, "measurement")});
    }
    if (t.pairs.empty()) {
        throw UsageError("--target is empty");
    }
    return t;
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

int status_exit(CertStatus s) { return s == CertStatus::infeasible ? kExitInfeasible : kExitOk; }

int cmd_certify(const CommonFlags& f, const std::string& mode, const std::string& target_spec, std::istream& in,
                std::ostream& out) {
    require_oracle_choice(f);
    const Json input = parse_json(read_input(f.input, in));
    const SolverOptions opts = solver_options(f, Exec::parallel);
    std::optional<OracleCheck> check;
    CertificationResult r;
    if (mode == "bb84") {
        const QberBox box = qber_box_from_json(input);
        r = box.is_point() ? certify_bb84(qber_set_from_json(input), opts) : certify_bb84_interval(box, opts);
        if (f.oracle_check) {
            const int res = f.oracle_resolution > 0 ? f.oracle_resolution : kDefaultBb84OracleResolution;
            check = OracleCheck{grid_oracle_bb84(box, res, opts.mode), res};
        }
    } else {
        const ObservationTable table = observation_table_from_json(input);
        const Target target = parse_target(target_spec);
        r = certify_general(table, target, opts);
        if (f.oracle_check) {
            if (!table.all_points() || target.pairs.size() != 1 || opts.mode != ConstraintMode::signed_born) {
                throw UsageError(
                    "the general-mode oracle handles point tables, a single target and signed constraints only; "
                    "rerun with --no-oracle");
            }
            const int res = f.oracle_resolution > 0 ? f.oracle_resolution : kDefaultGeneralOracleResolution;
            check = OracleCheck{grid_oracle_general(table, target.pairs[0], res), res};
        }
    }
    emit(out, certification_json(r, check));
    return status_exit(r.status);
}

struct SweepFlags {
    std::string kind = "qber";
    std::optional<double> start;
    std::optional<double> stop;
    int steps = 11;
    double p20 = 0.5;
    double p30 = 0.5;
    ChannelParams channel;
    std::string channel_file;
    std::string variant = "paper";
};

struct SweepPoint {
    double p_bar = 1.0;
    double h = 0.0;
    std::string status;
    std::optional<double> gap;
};

int cmd_sweep(const CommonFlags& f, SweepFlags s, std::ostream& out) {
    require_oracle_choice(f);
    const bool loss = s.kind == "loss";
    const double start = s.start.value_or(0.0);
    const double stop = s.stop.value_or(loss ? 25.0 : 0.5);
    if (!(start < stop)) {
        throw UsageError("sweep range needs start < stop");
    }
    if (!loss && (start < 0.0 || stop > 0.5)) {
        throw UsageError("QBER sweep range must lie within [0, 0.5]");
    }
    if (loss && start < 0.0) {
        throw UsageError("loss sweep range must be >= 0 dB");
    }
    if (!s.channel_file.empty()) {
        std::ifstream file(s.channel_file);
        if (!file) {
            throw UsageError("cannot open channel file " + s.channel_file);
        }
        s.channel = channel_params_from_json(
            parse_json(std::string(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>())));
    }
    try {
        s.channel.validate();
        table_from_qber(0.0, s.p20, s.p30);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const ChannelVariant variant = s.variant == "physical" ? ChannelVariant::physical : ChannelVariant::as_written;
    const SolverOptions opts = solver_options(f, Exec::serial);
    const int res = f.oracle_resolution > 0 ? f.oracle_resolution : kDefaultBb84OracleResolution;

    std::vector<double> xs(static_cast<std::size_t>(s.steps));
    for (int i = 0; i < s.steps; ++i) {
        xs[static_cast<std::size_t>(i)] = i + 1 == s.steps ? stop : start + (stop - start) * i / (s.steps - 1);
    }
    std::vector<SweepPoint> points(xs.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < s.steps; ++i) {
        const double x = xs[static_cast<std::size_t>(i)];
        SweepPoint& p = points[static_cast<std::size_t>(i)];
        double e = x;
        if (loss) {
            ChannelParams c = s.channel;
            c.loss_db = x;
            const QberEstimate est = qber_from_channel(c, variant);
            if (est.clipped) {
                p = {1.0, 0.0, "clipped", std::nullopt};
                continue;
            }
            e = est.e;
        }
        const QberSet q = table_from_qber(e, s.p20, s.p30);
        const CertificationResult r = certify_bb84(q, opts);
        p.status = std::string(to_string(r.status));
        p.p_bar = r.p_bar;
        if (r.status != CertStatus::infeasible && f.oracle_check) {
            if (const auto o = grid_oracle_bb84(q, res, opts.mode, Exec::serial)) {
                p.gap = *o - r.p_bar;
                p.p_bar = std::max(p.p_bar, *o);
            }
        }
        p.h = r.status == CertStatus::infeasible ? 0.0 : min_entropy(p.p_bar);
    }

    const std::optional<OracleCheck> label =
        f.oracle_check ? std::optional<OracleCheck>(OracleCheck{std::nullopt, res}) : std::nullopt;
    out << "# certificate=" << certificate_label(label) << '\n';
    if (loss) {
        out << "# channel_variant=" << s.variant << " eta_d=" << format_number(s.channel.eta_d)
            << " p_dark=" << format_number(s.channel.p_dark) << " d_e=" << format_number(s.channel.d_e) << '\n';
    } else {
        out << "# bqb14_ideal_p_guess=" << format_number(kBqb14IdealGuess) << '\n';
    }
    if (f.oracle_check) {
        double worst = 0.0;
        for (const auto& p : points) {
            worst = std::max(worst, p.gap.value_or(0.0));
        }
        out << "# max_oracle_gap=" << format_number(worst) << '\n';
    }
    out << kSweepHeader << '\n';
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << format_number(xs[i]) << ',' << format_number(points[i].p_bar) << ',' << format_number(points[i].h)
            << ',' << points[i].status << '\n';
    }
    return kExitOk;
}

struct DecoyFlags {
    double mu_signal = kDefaultSignalIntensity;
    int n_cut = kDefaultPhotonCutoff;
    bool pnr = false;
};

int cmd_decoy(const CommonFlags& f, const DecoyFlags& d, std::istream& in, std::ostream& out, std::ostream& err) {
    require_oracle_choice(f);
    const Json input = parse_json(read_input(f.input, in));
    PhotonBounds bounds;
    if (d.pnr) {
        const ObservationTable table = observation_table_from_json(input);
        if (!table.all_points()) {
            throw SchemaError("/q0: --pnr expects point values");
        }
        bounds = pnr_passthrough(table);
    } else {
        const auto obs = decoy_observations_from_json(input);
        try {
            bounds = bound_single_photon(obs, d.n_cut);
        } catch (const DecoyInfeasible& e) {
            err << e.what() << '\n';
            Json cells = Json::array();
            for (const auto& c : e.cells()) {
                cells.push_back(Json::array({c.x, c.y}));
            }
            emit(out, {{"status", "infeasible"}, {"infeasible_cells", cells}});
            return kExitInfeasible;
        }
    }
    const SolverOptions opts = solver_options(f, Exec::parallel);
    const PulseEntropy pe =
        total_min_entropy(bounds, d.mu_signal, [&](const QberBox& box) { return certify_bb84_interval(box, opts); });
    std::optional<OracleCheck> check;
    if (f.oracle_check) {
        const int res = f.oracle_resolution > 0 ? f.oracle_resolution : kDefaultBb84OracleResolution;
        check = OracleCheck{grid_oracle_bb84(qber_box_from_bounds(bounds), res, opts.mode), res};
    }
    const Json single = certification_json(pe.single_photon, check);
    const double h_single = single["h_min_bits"].get<double>();
    const double p1 = poisson_weight(1, d.mu_signal);
    emit(out, {{"q1_bounds", to_json(bounds)},
               {"h_min_single", h_single},
               {"bits_per_pulse", p1 * h_single},
               {"mu_signal", d.mu_signal},
               {"p1_signal", p1},
               {"status", single["status"]},
               {"single_photon", single}});
    return status_exit(pe.single_photon.status);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Randomness certification for prepare-and-measure quantum random number generators", "qrc"};
    app.require_subcommand(1);

    CommonFlags certify_flags;
    std::string mode = "bb84";
    std::string target = "2,0";
    auto* certify = app.add_subcommand("certify", "Certify one QBER set or observation table (JSON input)");
    add_common(*certify, certify_flags, true);
    certify->add_option("--mode", mode, "bb84: QBER set input; general: full observation table")
        ->check(CLI::IsMember({"bb84", "general"}))
        ->capture_default_str();
    certify->add_option("--target", target, "general mode: x,y pairs joined by '+'")->capture_default_str();

    CommonFlags sweep_flags;
    SweepFlags sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "QBER or channel-loss sweep in BB84 mode, CSV output");
    add_common(*sweep_cmd, sweep_flags, false);
    sweep_cmd->add_option("--kind", sweep.kind)->check(CLI::IsMember({"qber", "loss"}))->capture_default_str();
    sweep_cmd->add_option("--start", sweep.start, "Range start (default 0)");
    sweep_cmd->add_option("--stop", sweep.stop, "Range end (default 0.5 for qber, 25 for loss)");
    sweep_cmd->add_option("--steps", sweep.steps)->check(CLI::Range(2, 100000))->capture_default_str();
    sweep_cmd->add_option("--p20", sweep.p20)->capture_default_str();
    sweep_cmd->add_option("--p30", sweep.p30)->capture_default_str();
    sweep_cmd->add_option("--eta-d", sweep.channel.eta_d, "Detection efficiency")->capture_default_str();
    sweep_cmd->add_option("--p-dark", sweep.channel.p_dark, "Dark count probability per pulse")
        ->capture_default_str();
    sweep_cmd->add_option("--d-e", sweep.channel.d_e, "Misalignment error rate")->capture_default_str();
    sweep_cmd->add_option("--channel", sweep.channel_file, "ChannelParams JSON file (overrides the flags above)");
    sweep_cmd->add_option("--channel-variant", sweep.variant)
        ->check(CLI::IsMember({"paper", "physical"}))
        ->capture_default_str();

    CommonFlags decoy_flags;
    DecoyFlags decoy;
    auto* decoy_cmd = app.add_subcommand("decoy", "Single-photon bounds and entropy per pulse (JSON input)");
    add_common(*decoy_cmd, decoy_flags, true);
    decoy_cmd->add_option("--mu-signal", decoy.mu_signal)->check(CLI::PositiveNumber)->capture_default_str();
    decoy_cmd->add_option("--n-cut", decoy.n_cut)->check(CLI::Range(2, 60))->capture_default_str();
    decoy_cmd->add_flag("--pnr", decoy.pnr, "Input is the single-photon table of a photon-number-resolving setup");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (certify->parsed()) {
            return cmd_certify(certify_flags, mode, target, in, out);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep_flags, sweep, out);
        }
        return cmd_decoy(decoy_flags, decoy, in, out, err);
    } catch (const UsageError& e) {
        err << "qrc: " << e.what() << '\n';
    } catch (const SchemaError& e) {
        err << "qrc: invalid input " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        err << "qrc: " << e.what() << '\n';
    }
    return kExitUsage;
}

}  // namespace qrc
