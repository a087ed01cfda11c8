#pragma once

// Batch commands behind the command-line tool. Each one writes plot-ready CSVs under
// output.dir and returns a process exit code.

#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ssc/analysis.hpp"
#include "ssc/config.hpp"
#include "ssc/csv.hpp"

namespace ssc {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitDivergence = 3,
    kExitRejected = 4,  ///< infeasible certificate or decay-bound violation
};

struct CommandInfo {
    std::string name;
    std::string summary;
};

inline const std::vector<CommandInfo>& commands() {
    static const std::vector<CommandInfo> list{
        {"simulate", "closed-loop run; writes trajectory and summary CSVs"},
        {"lmi-check", "certificate search or point check; exit 0 iff feasible"},
        {"compare", "baseline vs configured shape; writes two trajectories and the cost CSV"},
        {"verify", "simulate, certify and check the decay bound; exit 0 iff within threshold"},
    };
    return list;
}

namespace command_detail {

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& stem) {
    std::filesystem::create_directories(cfg.output.dir);
    return std::filesystem::path(cfg.output.dir) / (cfg.output.prefix + "_" + stem + ".csv");
}

inline std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

/// Long format: one row per (sample, node).
inline void write_trajectory(const TrajectoryRecord& rec, const std::filesystem::path& path) {
    auto out = open_csv(path);
    const bool hyper = !rec.snapshots.empty() && rec.snapshots.front().has_velocity();
    std::vector<std::string> header{"t", "x", "z", "u"};
    if (hyper) header.push_back("zt");
    CsvWriter w(out, header);
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto& s = rec.snapshots[i];
        for (std::size_t k = 0; k < s.z.size(); ++k) {
            std::vector<double> row{s.t, rec.mesh.node(k), s.z[k], rec.controls[i][k]};
            if (hyper) row.push_back(s.zt[k]);
            w.row(row);
        }
    }
}

inline void write_summary(const TrajectoryRecord& rec, const std::filesystem::path& path) {
    auto out = open_csv(path);
    const auto act = actuation_energy(rec);
    CsvWriter w(out, {"t", "l2_sq", "int_abs_u", "int_sq_u"});
    for (std::size_t i = 0; i < rec.size(); ++i)
        w.row({act.t[i], l2_norm_sq(rec.snapshots[i], rec.mesh), act.int_abs_u[i], act.int_sq_u[i]});
}

inline std::vector<std::string> certificate_header() {
    return {"hyperbolic", "K",      "R",     "delta",  "beta1",       "beta2",    "p",
            "spacing",    "a1_lower", "a2_lo", "a2_hi", "phi_lo",      "phi_hi",   "b_lo",
            "b_hi",       "worst_lambda", "feasible", "gamma", "bound", "scanned", "feasible_count"};
}

inline void write_certificate(const LmiCertificate& c, std::size_t scanned, std::size_t feasible_count,
                              const std::filesystem::path& path) {
    auto out = open_csv(path);
    CsvWriter w(out, certificate_header());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto& b = c.bounds;
    w.row({b.order == Order::Hyperbolic ? 1.0 : 0.0, c.tuning.gain, c.tuning.young_weight, c.tuning.decay_rate,
           c.tuning.beta1, c.tuning.beta2, c.tuning.cross_weight, b.spacing, b.a1_lower, b.a2.lo, b.a2.hi, b.phi.lo,
           b.phi.hi, b.damping ? b.damping->lo : nan, b.damping ? b.damping->hi : nan, c.worst_lambda(),
           c.feasible ? 1.0 : 0.0, c.gamma, c.bound, static_cast<double>(scanned),
           static_cast<double>(feasible_count)});
}

inline void write_vertices(const LmiCertificate& c, const std::filesystem::path& path) {
    auto out = open_csv(path);
    CsvWriter w(out, {"phi", "a2", "b", "lambda_max"});
    for (const auto& v : c.vertices) w.row({v.phi, v.a2, v.b, v.lambda_max});
}

inline std::string stem_for(const ShapeSpec& shape, double gain) {
    return shape_label(shape) + "_K" + format_double(gain);
}

inline TrajectoryRecord run(const RunConfig& cfg, const ShapeSpec& shape) {
    return simulate(cfg.plant, ControllerSpec(cfg.gain, shape, cfg.partition), cfg.simulation);
}

struct CertificateOutcome {
    LmiCertificate cert;
    std::size_t scanned = 1;
    std::size_t feasible_count = 0;
};

/// Checks the configured tuning, or scans the grids when none is given.
inline CertificateOutcome find_certificate(const RunConfig& cfg, const std::optional<Tuning>& tuning,
                                           double f_sq_sup, double fx_sq_sup) {
    const auto bounds = certificate_bounds(cfg.plant, cfg.partition);
    CertificateOutcome o;
    if (tuning) {
        o.cert = check_certificate(*tuning, bounds, cfg.lmi.tolerance);
        attach_gamma(o.cert, f_sq_sup, fx_sq_sup);
        o.feasible_count = o.cert.feasible ? 1 : 0;
        return o;
    }
    SearchProblem problem{bounds, cfg.lmi.grids, cfg.lmi.tolerance, f_sq_sup, fx_sq_sup};
    auto r = search_feasible(problem);
    o.scanned = r.scanned;
    o.feasible_count = r.feasible_count;
    o.cert = r.best ? *r.best : r.least_violating;
    return o;
}

inline void report_certificate(const CertificateOutcome& o, std::ostream& log) {
    const auto& t = o.cert.tuning;
    log << "certificate feasible=" << (o.cert.feasible ? "yes" : "no") << " K=" << format_double(t.gain)
        << " R=" << format_double(t.young_weight) << " delta=" << format_double(t.decay_rate)
        << " beta1=" << format_double(t.beta1) << " beta2=" << format_double(t.beta2);
    if (o.cert.bounds.order == Order::Hyperbolic) log << " p=" << format_double(t.cross_weight);
    log << " worst_lambda=" << format_double(o.cert.worst_lambda()) << " scanned=" << o.scanned
        << " feasible_points=" << o.feasible_count << '\n';
}

inline int simulate_cmd(const RunConfig& cfg, std::ostream& log) {
    const auto rec = run(cfg, cfg.shape);
    const auto stem = stem_for(cfg.shape, cfg.gain);
    const auto traj = output_path(cfg, stem), summary = output_path(cfg, stem + "_summary");
    write_trajectory(rec, traj);
    write_summary(rec, summary);
    const auto act = actuation_energy(rec);
    log << "simulate plant=" << cfg.plant.name() << " shape=" << shape_label(cfg.shape)
        << " K=" << format_double(cfg.gain) << " steps=" << rec.steps << " dt=" << format_double(rec.dt)
        << " samples=" << rec.size() << '\n'
        << "l2_sq(0)=" << format_double(l2_norm_sq(rec.snapshots.front(), rec.mesh))
        << " l2_sq(t_end)=" << format_double(l2_norm_sq(rec.snapshots.back(), rec.mesh))
        << " int_int_abs_u=" << format_double(act.total_abs) << " peak_abs_u=" << format_double(act.peak_abs)
        << '\n';
    if (rec.clamped_samples) log << "warning: raised-cosine support clamped in " << rec.clamped_samples << " samples\n";
    log << "wrote " << traj.string() << '\n' << "wrote " << summary.string() << '\n';
    return kExitOk;
}

inline int lmi_check_cmd(const RunConfig& cfg, std::ostream& log) {
    const auto fb = cfg.plant.f().bounds();
    const double fbar = std::max(std::abs(fb.lo), std::abs(fb.hi));
    const auto o = find_certificate(cfg, cfg.lmi.tuning, fbar * fbar * cfg.plant.length(), cfg.lmi.fx_sq_sup);
    const auto cert_path = output_path(cfg, "certificate"), vert_path = output_path(cfg, "vertices");
    write_certificate(o.cert, o.scanned, o.feasible_count, cert_path);
    write_vertices(o.cert, vert_path);
    report_certificate(o, log);
    log << "wrote " << cert_path.string() << '\n' << "wrote " << vert_path.string() << '\n';
    return o.cert.feasible ? kExitOk : kExitRejected;
}

inline int compare_cmd(const RunConfig& cfg, std::ostream& log) {
    const auto a = run(cfg, cfg.baseline_shape);
    const auto b = run(cfg, cfg.shape);
    const auto cost = cost_integral_I(a, b);
    const auto pa = output_path(cfg, "baseline_" + stem_for(cfg.baseline_shape, cfg.gain));
    const auto pb = output_path(cfg, "proposed_" + stem_for(cfg.shape, cfg.gain));
    const auto pc = output_path(cfg, "cost");
    write_trajectory(a, pa);
    write_trajectory(b, pb);
    {
        auto out = open_csv(pc);
        CsvWriter w(out, {"t", "I", "int_abs_u_A", "int_abs_u_B", "int_sq_u_A", "int_sq_u_B"});
        for (std::size_t i = 0; i < cost.t.size(); ++i)
            w.row({cost.t[i], cost.I[i], cost.int_abs_u_a[i], cost.int_abs_u_b[i], cost.int_sq_u_a[i],
                   cost.int_sq_u_b[i]});
    }
    const auto ea = actuation_energy(a), eb = actuation_energy(b);
    log << "compare A=" << cost.label_a << " B=" << cost.label_b << " K=" << format_double(cfg.gain)
        << " I(t_end)=" << format_double(cost.I.back()) << '\n'
        << "int_int_abs_u A=" << format_double(ea.total_abs) << " B=" << format_double(eb.total_abs) << '\n'
        << "wrote " << pa.string() << '\n'
        << "wrote " << pb.string() << '\n'
        << "wrote " << pc.string() << '\n';
    return kExitOk;
}

inline int verify_cmd(const RunConfig& cfg, std::ostream& log) {
    const auto rec = run(cfg, cfg.shape);
    const auto inputs = gamma_inputs(rec);
    const auto o = find_certificate(cfg, cfg.verify.tuning, inputs.f_sq_sup, inputs.fx_sq_sup);
    report_certificate(o, log);
    write_certificate(o.cert, o.scanned, o.feasible_count, output_path(cfg, "certificate"));
    write_vertices(o.cert, output_path(cfg, "vertices"));
    if (!o.cert.feasible) {
        log << "verify: no feasible certificate, decay bound not checked\n";
        return kExitRejected;
    }
    const auto report = verify_decay(rec, o.cert);
    const auto path = output_path(cfg, "decay");
    {
        auto out = open_csv(path);
        CsvWriter w(out, {"t", "V", "bound"});
        for (std::size_t i = 0; i < report.t.size(); ++i) w.row({report.t[i], report.V[i], report.bound[i]});
    }
    const double allowed = cfg.verify.threshold * report.v0;
    const bool ok = report.violation <= allowed;
    log << "verify delta=" << format_double(report.delta) << " gamma=" << format_double(report.gamma)
        << " V(0)=" << format_double(report.v0) << " V(t_end)=" << format_double(report.V.back())
        << " violation=" << format_double(report.violation) << " allowed=" << format_double(allowed)
        << " result=" << (ok ? "pass" : "fail") << '\n'
        << "wrote " << path.string() << '\n';
    return ok ? kExitOk : kExitRejected;
}

}  // namespace command_detail

/// Runs one command and maps errors onto exit codes; messages go to `err`.
inline int run_command(std::string_view command, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    try {
        if (command == "simulate") return command_detail::simulate_cmd(cfg, log);
        if (command == "lmi-check") return command_detail::lmi_check_cmd(cfg, log);
        if (command == "compare") return command_detail::compare_cmd(cfg, log);
        if (command == "verify") return command_detail::verify_cmd(cfg, log);
        err << "error: unknown command '" << command << "'\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace ssc
