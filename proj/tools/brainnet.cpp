// brainnet command-line front end.
//
// Exit codes: 0 success, 1 computation error, 2 usage or input-file error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brainnet/brainnet.hpp"

namespace fs = std::filesystem;
using namespace brainnet;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string mask, conn, parcellation, network, truth, groups, init;
    std::string out = ".";
    int k = 0;
    int init_k = 0;
    double eps = 0.01;
    std::optional<double> spectrum_eps;
    double gamma = 0.3;
    double r = 2.0;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string edge_weight = "max";
    double sim_threshold = 0.9;
    int max_rounds = 10;
    int bins = 40;

    std::vector<int> dims{12, 12, 12};
    int blocks = 4;
    double within = 5.0, cross = 1.0, sd = 0.5, conn_radius = 12.0, decay = 0.0;

    std::vector<int> sweep_k;
    std::vector<std::string> sweep_eps;
    int n_random = 20;
    std::vector<std::string> features;
    double svm_c = 1.0;
    bool pooled = false;
};

/// Files written by the current command; removed again if it fails.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        if (!created_dir_) {
            std::error_code ec;
            fs::create_directories(dir_, ec);
            if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
            created_dir_ = true;
        }
        const fs::path p = dir_ / name;
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open '" + p.string() + "' for writing");
        written_.push_back(p);
        f << content;
        f.flush();
        if (!f) throw IoError("write failed for '" + p.string() + "'");
    }

    void rollback() noexcept {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        written_.clear();
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool created_dir_ = false;
};

class Timer {
public:
    explicit Timer(std::string stage) : stage_(std::move(stage)), t0_(std::chrono::steady_clock::now()) {}
    ~Timer() { report(stage_, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count()); }

    static void report(const std::string& stage, double seconds) {
        std::fprintf(stderr, "time %s %.3fs\n", stage.c_str(), seconds);
    }

private:
    std::string stage_;
    std::chrono::steady_clock::time_point t0_;
};

void require(const std::string& value, const std::string& flag) {
    if (value.empty()) throw UsageError(flag + " is required");
}

double parse_eps(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !(v >= 0.0) || v > 1.0) throw UsageError("bad eps value '" + s + "'");
    return v;
}

EdgeWeight edge_weight(const Config& c) {
    if (c.edge_weight == "max") return EdgeWeight::max;
    if (c.edge_weight == "normalized") return EdgeWeight::normalized;
    throw UsageError("--edge-weight must be max or normalized");
}

SparseSymMatrix load_conn(const std::string& path, std::size_t n) {
    Timer t("read-connectivity");
    return io::read_sparse(path, static_cast<Index>(n), {.strict_nonnegative = true});
}

/// Network from --network, or built from --conn and --parcellation.
BrainNetwork load_network(const Config& c) {
    if (!c.network.empty()) return read_network(c.network);
    if (c.conn.empty() || c.parcellation.empty()) throw UsageError("give --network, or --conn with --parcellation");
    const Parcellation p = io::read_parcellation(c.parcellation);
    const auto conn = load_conn(c.conn, p.size());
    Timer t("network");
    return build_network(conn, p, edge_weight(c));
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
}

// ---- subcommands ----------------------------------------------------------

void cmd_synth(const Config& c, Outputs& out) {
    if (c.dims.size() != 3) throw UsageError("--dims needs three values, e.g. 12,12,12");
    const Dims dims{c.dims[0], c.dims[1], c.dims[2]};
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) throw UsageError("--dims values must be positive");
    if (c.blocks < 1 || c.blocks > dims.volume())
        throw UsageError("--blocks must be between 1 and the voxel count (" + std::to_string(dims.volume()) + ")");
    PhantomParams pp;
    pp.dims = dims;
    pp.blocks = c.blocks;
    pp.within_mean = c.within;
    pp.cross_mean = c.cross;
    pp.noise_sd = c.sd;
    pp.conn_radius = c.conn_radius;
    pp.decay_length = c.decay;
    Rng rng(c.seed);
    Phantom ph;
    {
        Timer t("synth");
        ph = generate_phantom(pp, rng);
    }
    std::ostringstream mask, conn, truth;
    io::write_mask(ph.mask, mask);
    io::write_sparse(ph.conn, conn);
    io::write_parcellation(ph.ground_truth, truth);
    out.write("mask.txt", mask.str());
    out.write("conn.txt", conn.str());
    out.write("truth.txt", truth.str());
    std::printf("voxels=%zu edges=%zu blocks=%d\n", ph.mask.size(), ph.conn.upper_triplets().size(), c.blocks);
}

void cmd_parcellate(const Config& c, Outputs& out) {
    require(c.mask, "--mask");
    require(c.conn, "--conn");
    if (c.k < 1) throw UsageError("--k must be at least 1");
    const VoxelMask mask = io::read_mask(c.mask);
    if (static_cast<std::size_t>(c.k) > mask.size()) throw UsageError("--k exceeds the voxel count");
    const auto conn = load_conn(c.conn, mask.size());
    std::optional<Parcellation> truth;
    if (!c.truth.empty()) truth = io::read_parcellation(c.truth, static_cast<Index>(mask.size()));

    Rng rng(c.seed);
    Parcellation init;
    if (!c.init.empty()) {
        init = io::read_parcellation(c.init, static_cast<Index>(mask.size()));
    } else {
        const int init_k = c.init_k > 0 ? c.init_k : default_init_regions(mask.size(), c.k);
        if (init_k < 2 || static_cast<std::size_t>(init_k) > mask.size())
            throw UsageError("--init-k must be between 2 and the voxel count");
        init = random_parcellation(mask, init_k, rng, c.r);
    }
    IterativeOptions opts;
    opts.sim_threshold = c.sim_threshold;
    opts.max_rounds = c.max_rounds;
    opts.radius = c.r;
    const IterativeResult res = parcellate_iterative(mask, conn, c.k, init, rng, opts);
    Timer::report("similarity", res.times.similarity);
    Timer::report("eigensolve", res.times.eigensolve);
    Timer::report("kmeans", res.times.kmeans);

    std::string log = res.log();
    log += res.converged ? "converged\n" : "not converged\n";
    if (truth) log += "ari_vs_truth=" + io::format_double(parcellation_similarity(res.parcellation, *truth)) + "\n";
    std::ostringstream p;
    io::write_parcellation(res.parcellation, p);
    out.write("parcellation.txt", p.str());
    out.write("parcellate.log", log);
    std::fputs(log.c_str(), stdout);
}

void cmd_network(const Config& c, Outputs& out) {
    require(c.conn, "--conn");
    require(c.parcellation, "--parcellation");
    const BrainNetwork net = load_network(c);
    std::ostringstream s;
    write_network(net, s);
    out.write("network.txt", s.str());
}

void cmd_metrics(const Config& c, Outputs& out) {
    if (c.eps < 0.0 || c.eps > 1.0) throw UsageError("--eps must be in [0, 1]");
    std::string csv = metrics_csv_header() + "\n";
    if (c.sweep_k.empty()) {
        const BrainNetwork net = load_network(c);
        Timer t("metrics");
        const BinaryNetwork g = preprocess(net, c.eps);
        csv += metrics_csv_row(compute_metrics(g, net.k())) + "\n";
    } else {
        require(c.mask, "--mask");
        require(c.conn, "--conn");
        const VoxelMask mask = io::read_mask(c.mask);
        const auto conn = load_conn(c.conn, mask.size());
        const auto kind = edge_weight(c);
        Rng rng(c.seed);
        for (int k : c.sweep_k) {
            if (k < 2 || static_cast<std::size_t>(k) > mask.size())
                throw UsageError("--sweep-k values must be between 2 and the voxel count");
            Rng stream = rng.split();
            Timer t("metrics k=" + std::to_string(k));
            const Parcellation p = random_parcellation(mask, k, stream, c.r);
            const BinaryNetwork g = preprocess(build_network(conn, p, kind), c.eps);
            csv += metrics_csv_row(compute_metrics(g, k)) + "\n";
        }
    }
    out.write("metrics.csv", csv);
    std::fputs(csv.c_str(), stdout);
}

std::string spectrum_summary_row(const std::string& label, const Spectrum& s) {
    return csv_join({label, std::to_string(s.size()), std::to_string(s.removed.size()), io::format_double(s.lambda2),
                     std::to_string(s.modularity), io::format_double(s.eigenvalues.back()),
                     io::format_double(s.near_bipartite_gap)});
}

void cmd_spectrum(const Config& c, Outputs& out) {
    if (c.bins < 1) throw UsageError("--bins must be positive");
    const BrainNetwork net = load_network(c);
    SpectrumOptions opts;
    opts.gamma = c.gamma;
    const std::string summary_header = "eps,nodes,removed,lambda2,modularity,lambda_max,bipartite_gap\n";

    if (c.sweep_eps.empty()) {
        const BrainNetwork w = c.spectrum_eps ? threshold_weighted(net, *c.spectrum_eps) : net;
        Spectrum s;
        {
            Timer t("spectrum");
            s = spectrum(w, opts);
        }
        std::ostringstream values, hist;
        write_spectrum(s, values);
        write_histogram(spectral_histogram(s, c.bins), hist);
        out.write("spectrum.txt", values.str());
        out.write("histogram.csv", hist.str());
        const std::string label = c.spectrum_eps ? io::format_double(*c.spectrum_eps) : "none";
        out.write("spectrum_summary.csv", summary_header + spectrum_summary_row(label, s));
        std::fputs(values.str().c_str(), stdout);
        return;
    }

    std::vector<double> eps;
    for (const auto& e : c.sweep_eps) eps.push_back(parse_eps(e));
    std::vector<Spectrum> spectra;
    std::string summary = summary_header;
    std::string sweep = "eps,binary_nodes,binary_edges,cpl,e_global,clustering,sparsity,n_components\n";
    for (std::size_t i = 0; i < eps.size(); ++i) {
        Timer t("spectrum eps=" + c.sweep_eps[i]);
        const BinaryNetwork g = preprocess(net, eps[i]);
        const MetricsReport m = compute_metrics(g, net.k());
        sweep += csv_join({c.sweep_eps[i], std::to_string(g.size()), std::to_string(g.edge_count()), io::format_double(m.cpl),
                           io::format_double(m.e_global), io::format_double(m.clustering), io::format_double(m.sparsity),
                           std::to_string(m.n_components)});
        spectra.push_back(spectrum(threshold_weighted(net, eps[i]), opts));
        std::ostringstream values;
        write_spectrum(spectra.back(), values);
        out.write("spectrum_eps_" + c.sweep_eps[i] + ".txt", values.str());
        summary += spectrum_summary_row(c.sweep_eps[i], spectra.back());
    }
    std::string dist = "eps_a,eps_b,w1\n";
    for (std::size_t a = 0; a < spectra.size(); ++a)
        for (std::size_t b = a + 1; b < spectra.size(); ++b)
            dist += csv_join({c.sweep_eps[a], c.sweep_eps[b], io::format_double(spectral_distance(spectra[a], spectra[b]))});
    out.write("spectrum_summary.csv", summary);
    out.write("sweep.csv", sweep);
    out.write("distances.csv", dist);
    std::fputs(sweep.c_str(), stdout);
    std::fputs(dist.c_str(), stdout);
}

void cmd_consistency(const Config& c, Outputs& out) {
    require(c.mask, "--mask");
    require(c.conn, "--conn");
    require(c.parcellation, "--parcellation");
    if (c.n_random < 1) throw UsageError("--random must be positive");
    const VoxelMask mask = io::read_mask(c.mask);
    const auto conn = load_conn(c.conn, mask.size());
    const Parcellation p = io::read_parcellation(c.parcellation, static_cast<Index>(mask.size()));
    Rng rng(c.seed);
    const int profile_k = c.init_k > 0 ? c.init_k : default_init_regions(mask.size(), p.k());
    if (profile_k < 2 || static_cast<std::size_t>(profile_k) > mask.size())
        throw UsageError("--init-k must be between 2 and the voxel count");
    const Parcellation profile = random_parcellation(mask, profile_k, rng, c.r);
    std::vector<Parcellation> rand;
    for (int i = 0; i < c.n_random; ++i) rand.push_back(random_parcellation(mask, p.k(), rng, c.r));

    Timer t("consistency");
    const ComparisonReport rep = compare_parcellations(conn, p, rand, profile);
    std::string csv = "parcellation,consistency\n";
    csv += csv_join({"connectivity", io::format_double(rep.connectivity.value)});
    for (std::size_t i = 0; i < rep.random_values.size(); ++i)
        csv += csv_join({"random_" + std::to_string(i + 1), io::format_double(rep.random_values[i])});
    const std::string test = "t,df,p,exceeds_all\n" + csv_join({io::format_double(rep.test.t), io::format_double(rep.test.df),
                                                                  io::format_double(rep.test.p), rep.exceeds_all ? "1" : "0"});
    out.write("consistency.csv", csv);
    out.write("consistency_test.csv", test);
    std::fputs(test.c_str(), stdout);
}

void cmd_stats(const Config& c, Outputs& out) {
    require(c.groups, "--groups");
    const GroupSample sample = read_group_sample(c.groups);
    const auto names = sample.group_names();
    if (names.size() != 2) throw UsageError("--groups file must contain exactly two groups");
    const auto features = c.features.empty() ? sample.feature_names : c.features;
    for (const auto& f : features) sample.feature_index(f);

    std::string tt = "feature,group_a,group_b,mean_a,mean_b,t,df,p\n";
    for (const auto& f : sample.feature_names) {
        const auto a = sample.column(f, names[0]), b = sample.column(f, names[1]);
        const auto r = welch_t_test(a, b, {.pooled = c.pooled});
        tt += csv_join({f, names[0], names[1], io::format_double(mean(a)), io::format_double(mean(b)), io::format_double(r.t),
                        io::format_double(r.df), io::format_double(r.p)});
    }
    Rng rng(c.seed);
    LoocvResult cv;
    {
        Timer t("loocv");
        cv = loocv_linear_svm(sample, features, rng, {.C = c.svm_c});
    }
    std::string acc = "group,accuracy\n";
    for (std::size_t g = 0; g < 2; ++g) acc += csv_join({cv.groups[g], io::format_double(cv.accuracy[g])});
    out.write("ttests.csv", tt);
    out.write("loocv.csv", acc);
    std::fputs(tt.c_str(), stdout);
    std::fputs(acc.c_str(), stdout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Connectivity-based brain parcellation and network analysis"};
    app.require_subcommand(1);
    Config c;

    auto common = [&](CLI::App* s) {
        s->add_option("--seed", c.seed, "Random seed");
        s->add_option("--threads", c.threads, "Worker thread cap (0 = hardware)");
        s->add_option("--out", c.out, "Output directory");
    };
    auto inputs = [&](CLI::App* s) {
        s->add_option("--mask", c.mask, "Voxel mask file");
        s->add_option("--conn", c.conn, "Voxel connectivity file");
        s->add_option("--parcellation", c.parcellation, "Parcellation file");
        s->add_option("--r", c.r, "Spatial adjacency radius (voxels)");
    };
    auto network_inputs = [&](CLI::App* s) {
        inputs(s);
        s->add_option("--network", c.network, "Region network file (or edge list)");
        s->add_option("--edge-weight", c.edge_weight, "max or normalized")->check(CLI::IsMember({"max", "normalized"}));
    };

    auto* synth = app.add_subcommand("synth", "Write a synthetic phantom (mask, connectivity, ground truth)");
    common(synth);
    synth->add_option("--dims", c.dims, "Grid size nx,ny,nz")->delimiter(',')->expected(3);
    synth->add_option("--blocks", c.blocks, "Planted region count");
    synth->add_option("--within", c.within, "Mean within-block weight");
    synth->add_option("--cross", c.cross, "Mean cross-block weight");
    synth->add_option("--sd", c.sd, "Weight noise standard deviation");
    synth->add_option("--conn-radius", c.conn_radius, "Largest connected voxel distance");
    synth->add_option("--decay", c.decay, "Distance decay length (0 = off)");

    auto* parc = app.add_subcommand("parcellate", "Iterative connectivity-based parcellation");
    common(parc);
    inputs(parc);
    parc->add_option("--k", c.k, "Region count")->required();
    parc->add_option("--init-k", c.init_k, "Regions in the random initial segmentation");
    parc->add_option("--init", c.init, "Initial parcellation file instead of a random one");
    parc->add_option("--sim-threshold", c.sim_threshold, "ARI between rounds that counts as converged");
    parc->add_option("--max-rounds", c.max_rounds, "Round budget");
    parc->add_option("--truth", c.truth, "Ground-truth parcellation for an ARI report");

    auto* net = app.add_subcommand("network", "Region network from connectivity and a parcellation");
    common(net);
    network_inputs(net);

    auto* met = app.add_subcommand("metrics", "Graph metrics of the thresholded binary network");
    common(met);
    network_inputs(met);
    met->add_option("--eps", c.eps, "Threshold on row-normalized weights");
    met->add_option("--sweep-k", c.sweep_k, "Comma list of region counts (random parcellations)")->delimiter(',');

    auto* spec = app.add_subcommand("spectrum", "Normalized Laplacian spectrum of a weighted network");
    common(spec);
    network_inputs(spec);
    spec->add_option("--gamma", c.gamma, "Eigenvalue cutoff for the modularity count");
    spec->add_option("--eps", c.spectrum_eps, "Drop edges below this row-normalized weight first");
    spec->add_option("--sweep-eps,--eps-sweep", c.sweep_eps, "Comma list of thresholds to compare")->delimiter(',');
    spec->add_option("--bins", c.bins, "Histogram bins over [0, 2]");

    auto* cons = app.add_subcommand("consistency", "Regional consistency against random parcellations");
    common(cons);
    inputs(cons);
    cons->add_option("--random", c.n_random, "Number of random parcellations");
    cons->add_option("--init-k", c.init_k, "Regions of the parcellation the profiles are taken against");

    auto* stats = app.add_subcommand("stats", "Group t-tests and LOOCV linear SVM");
    common(stats);
    stats->add_option("--groups", c.groups, "CSV: subject,group,<features>");
    stats->add_option("--features", c.features, "Comma list of classifier features (default: all)")->delimiter(',');
    stats->add_option("--svm-c", c.svm_c, "SVM regularization constant");
    stats->add_flag("--pooled", c.pooled, "Equal-variance t-test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    set_num_threads(c.threads);
    Outputs out(c.out);
    try {
        if (*synth) cmd_synth(c, out);
        else if (*parc) cmd_parcellate(c, out);
        else if (*net) cmd_network(c, out);
        else if (*met) cmd_metrics(c, out);
        else if (*spec) cmd_spectrum(c, out);
        else if (*cons) cmd_consistency(c, out);
        else if (*stats) cmd_stats(c, out);
        return 0;
    } catch (const UsageError& e) {
        out.rollback();
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        out.rollback();
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        out.rollback();
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        out.rollback();
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
