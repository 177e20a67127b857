#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "streamfdr/csv.hpp"
#include "streamfdr/experiments.hpp"
#include "streamfdr/streamfdr.hpp"

namespace {

using namespace streamfdr;

Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        long long num = std::stoll(s.substr(0, slash));
        long long den = std::stoll(s.substr(slash + 1));
        return Rational(num, den);
    }
    return Rational::from_double(std::stod(s), 1000000);
}

struct GlobalOpts {
    std::uint64_t seed = 20240801;
    int jobs = 1;
    bool quick = false;
    bool plot = false;
    std::string out = "out";
};

int cmd_simulate(const GlobalOpts& g, const std::string& kind, double pi, double delta,
                 long long length, const std::string& dist, int nu, const std::string& output) {
    std::ostream* os = &std::cout;
    std::ofstream of;
    if (output != "-") {
        of.open(output);
        if (!of) { std::cerr << "cannot write " << output << "\n"; return 1; }
        os = &of;
    }
    if (kind == "oracle") {
        OraclePValueConfig cfg;
        cfg.pi = pi;
        cfg.delta = delta;
        cfg.length = length;
        cfg.seed = g.seed;
        auto series = generate_oracle_pvalues(cfg);
        *os << "t,value,label\n";
        for (std::size_t i = 0; i < series.pvalues.size(); ++i) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.17g", series.pvalues[i]);
            *os << (i + 1) << "," << buf << "," << series.labels[i] << "\n";
        }
    } else {
        MixtureConfig cfg;
        cfg.pi = pi;
        cfg.anomaly_shift = delta;
        cfg.length = length;
        cfg.seed = g.seed;
        cfg.ref_dist = dist == "student" ? RefDist::StudentDF : RefDist::GaussianStd;
        cfg.student_nu = nu;
        auto series = generate_mixture(cfg);
        write_series_csv(*os, series.values, &series.labels);
    }
    return 0;
}

int cmd_detect(const GlobalOpts&, const std::string& input, DetectorConfig cfg,
               const std::string& policy, const std::string& pvalue, const std::string& strategy,
               bool summary, const std::string& output) {
    if (policy == "lord3" && pvalue == "conformal")
        std::cerr << "warning: LORD3 on conformal p-values has very weak detection power "
                     "(conformal p-values cannot go below 1/(n+1))\n";

    std::istream* is = &std::cin;
    std::ifstream inf;
    if (input != "-") {
        inf.open(input);
        if (!inf) { std::cerr << "cannot read " << input << "\n"; return 1; }
        is = &inf;
    }
    SeriesCsv data;
    try {
        data = read_series_csv(*is);
    } catch (const std::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    }

    if (pvalue == "oracle") cfg.oracle_survival = [](double s) { return normal_survival(s); };
    if (strategy == "sliding-oracle" && !data.has_labels) {
        std::cerr << "sliding-oracle calibration needs a labeled input\n";
        return 1;
    }

    std::vector<DetectionRecord> recs;
    try {
        recs = run_stream(data.values, data.has_labels ? &data.labels : nullptr, cfg);
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    }

    std::ostream* os = &std::cout;
    std::ofstream of;
    if (output != "-") {
        of.open(output);
        if (!of) { std::cerr << "cannot write " << output << "\n"; return 1; }
        os = &of;
    }
    *os << "t,pvalue,threshold,decision" << (data.has_labels ? ",label" : "") << "\n";
    for (const auto& r : recs) {
        char pb[48], tb[48];
        std::snprintf(pb, sizeof(pb), "%.17g", r.pvalue);
        std::snprintf(tb, sizeof(tb), "%.17g", r.threshold);
        *os << r.t << "," << (r.warmup ? "nan" : pb) << "," << tb << "," << r.decision;
        if (data.has_labels) *os << "," << r.label;
        *os << "\n";
    }
    if (summary) {
        if (!data.has_labels) {
            std::cerr << "--summary needs a labeled input\n";
            return 1;
        }
        auto c = confusion_from_records(recs);
        std::fprintf(stderr, "R=%lld FP=%lld FN=%lld m1=%lld FDP=%.6g FNP=%.6g\n",
                     c.R, c.FP, c.FN, c.m1, fdp(c), fnp(c));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming anomaly detection with window-level FDR control"};
    app.set_config("--config", "", "INI config file; CLI flags override it");
    app.require_subcommand(0, 1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads for replications")->capture_default_str();
    app.add_flag("--quick", g.quick, "smaller replication budgets");
    app.add_flag("--plot", g.plot, "emit SVG plots where available");
    app.add_option("--out", g.out, "output directory")->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic series as CSV");
    std::string sim_kind = "mixture", sim_dist = "gaussian", sim_out = "-";
    double sim_pi = 0.01, sim_delta = 4.0;
    long long sim_len = 10000;
    int sim_nu = 5;
    sim->add_option("--kind", sim_kind, "mixture (raw values) or oracle (true p-values)")
        ->check(CLI::IsMember({"mixture", "oracle"}))->capture_default_str();
    sim->add_option("--pi", sim_pi, "anomaly probability")->capture_default_str();
    sim->add_option("--delta", sim_delta, "anomaly shift (mixture) or atypicity (oracle)")
        ->capture_default_str();
    sim->add_option("--length", sim_len, "series length")->capture_default_str();
    sim->add_option("--dist", sim_dist, "reference distribution")
        ->check(CLI::IsMember({"gaussian", "student"}))->capture_default_str();
    sim->add_option("--nu", sim_nu, "Student degrees of freedom")->capture_default_str();
    sim->add_option("--output", sim_out, "output file, - for stdout")->capture_default_str();

    // detect
    auto* det = app.add_subcommand("detect", "run the online detector on a CSV stream");
    std::string det_in = "-", det_out = "-";
    std::string det_windowing = "overlapping", det_policy = "mbh", det_pvalue = "empirical";
    std::string det_strategy = "sliding", det_score = "identity", det_alpha = "1/10",
                det_pihat = "1/100";
    long long det_m = 100, det_n = 999;
    bool det_force_n = false, det_summary = false;
    det->add_option("--input", det_in, "input CSV (t,value[,label]), - for stdin")
        ->capture_default_str();
    det->add_option("--output", det_out, "records CSV, - for stdout")->capture_default_str();
    det->add_option("--m", det_m, "window size")->capture_default_str();
    det->add_option("--windowing", det_windowing, "window layout")
        ->check(CLI::IsMember({"disjoint", "overlapping"}))->capture_default_str();
    det->add_option("--policy", det_policy, "threshold policy")
        ->check(CLI::IsMember({"bh", "mbh", "lord3"}))->capture_default_str();
    det->add_option("--alpha", det_alpha, "target FDR level, a/b or decimal")
        ->capture_default_str();
    det->add_option("--pi-hat", det_pihat, "anomaly-probability estimate for mBH")
        ->capture_default_str();
    det->add_option("--pvalue", det_pvalue, "p-value estimator")
        ->check(CLI::IsMember({"empirical", "conformal", "oracle"}))->capture_default_str();
    det->add_option("--n", det_n, "calibration set size")->capture_default_str();
    det->add_option("--strategy", det_strategy, "calibration update strategy")
        ->check(CLI::IsMember({"fixed", "sliding", "sliding-oracle"}))->capture_default_str();
    det->add_option("--score", det_score, "score function")
        ->check(CLI::IsMember({"identity", "zscore"}))->capture_default_str();
    det->add_flag("--force-n", det_force_n, "accept a calibration size off the tuned lattice");
    det->add_flag("--summary", det_summary, "print FDP/FNP to stderr (labeled input only)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a named experiment");
    std::string exp_name;
    bool exp_check = false;
    std::vector<std::string> exp_params;
    exp->add_option("name", exp_name, "experiment name (see `list`)")->required();
    exp->add_flag("--check", exp_check, "verify built-in targets; exit 2 on failure");
    exp->add_option("--param", exp_params, "key=value override, repeatable");

    auto* lst = app.add_subcommand("list", "list available experiments");
    auto* shw = app.add_subcommand("show-config", "print the effective global configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(g, sim_kind, sim_pi, sim_delta, sim_len, sim_dist, sim_nu,
                                sim_out);

        if (det->parsed()) {
            DetectorConfig cfg;
            cfg.window_m = det_m;
            cfg.windowing =
                det_windowing == "disjoint" ? Windowing::Disjoint : Windowing::Overlapping;
            cfg.policy.kind = det_policy == "bh"    ? PolicyKind::BH
                              : det_policy == "mbh" ? PolicyKind::MBH
                                                    : PolicyKind::LORD3;
            cfg.policy.alpha = parse_rational(det_alpha);
            cfg.policy.pi_hat = parse_rational(det_pihat);
            cfg.policy.lord = LordConfig::defaults(cfg.policy.alpha.value());
            cfg.pvalue_kind = det_pvalue == "empirical"   ? PValueKind::Empirical
                              : det_pvalue == "conformal" ? PValueKind::Conformal
                                                          : PValueKind::Oracle;
            cfg.calib_n = det_n;
            cfg.calib_strategy = det_strategy == "fixed" ? CalibStrategy::Fixed
                                 : det_strategy == "sliding-oracle"
                                     ? CalibStrategy::SlidingOracle
                                     : CalibStrategy::SlidingEstimated;
            cfg.score = det_score == "zscore" ? ScoreFunction::zscore(0.0, 1.0)
                                              : ScoreFunction::identity();
            cfg.force_n = det_force_n;
            return cmd_detect(g, det_in, cfg, det_policy, det_pvalue, det_strategy, det_summary,
                              det_out);
        }

        if (exp->parsed()) {
            ExperimentSpec spec;
            spec.name = exp_name;
            spec.seed = g.seed;
            spec.jobs = g.jobs;
            spec.quick = g.quick;
            spec.plot = g.plot;
            spec.check = exp_check;
            spec.out_dir = g.out;
            for (const auto& kv : exp_params) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    std::cerr << "bad --param (expected key=value): " << kv << "\n";
                    return 1;
                }
                spec.params[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            auto res = run_experiment(spec);
            std::cout << "results: " << res.results_path << "\n";
            std::cout << "summary: " << res.summary_path << "\n";
            if (exp_check) {
                for (const auto& c : res.checks)
                    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.label << " (" << c.detail
                              << ")\n";
                if (!res.checks_passed()) return 2;
            }
            return 0;
        }

        if (lst->parsed()) {
            for (const auto& e : experiment_catalog())
                std::cout << e.name << "\t" << e.description << "\n";
            return 0;
        }

        if (shw->parsed()) {
            std::cout << "seed=" << g.seed << "\njobs=" << g.jobs
                      << "\nquick=" << (g.quick ? 1 : 0) << "\nplot=" << (g.plot ? 1 : 0)
                      << "\nout=" << g.out << "\n";
            return 0;
        }

        std::cout << app.help();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
