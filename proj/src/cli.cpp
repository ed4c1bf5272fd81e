#include "xroute/cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "xroute/digest.hpp"
#include "xroute/errors.hpp"
#include "xroute/experiments.hpp"
#include "xroute/routing.hpp"
#include "xroute/simkernel.hpp"

namespace xroute {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string body = ss.str();
    return "sha256:" + to_hex(sha256(body));
}

std::string meta_line(std::uint64_t seed, const std::string& input) {
    return "# meta: version=" + std::string(kVersion) + " seed=" + std::to_string(seed) +
           " input=" + input + "\n";
}

void emit(const std::string& out_path, std::ostream& out, const std::string& body) {
    if (out_path.empty()) {
        out << body;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw SchemaError("cannot write output file: " + out_path);
    f << body;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw ConfigError("empty numeric list: " + csv);
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    if (out.empty()) throw ConfigError("empty integer list: " + csv);
    return out;
}

RoutingObjective parse_objective(const std::string& name) {
    if (name == "min-hops") return RoutingObjective::MinHops;
    if (name == "min-fee") return RoutingObjective::MinFee;
    if (name == "min-latency") return RoutingObjective::MinLatency;
    throw ConfigError("unknown objective: " + name);
}

PolicySet policy_from_flag(const std::string& constraints) {
    PolicySet ps;
    ps.base_version = "ics20-1";
    if (!constraints.empty()) ps.security = parse_security_constraints(constraints);
    return ps;
}

struct TopologyInput {
    Topology topology;
    std::string digest;  // meta "input=" value
};

/// --topo file wins; otherwise --synthetic
/// "scale-free:<chains>:<seed>[:<edges>[:<exponent>]]", "star:<leaves>" or
/// "line:<chains>".
TopologyInput resolve_topology(const std::string& topo_path, const std::string& synthetic) {
    if (!topo_path.empty())
        return {load_topology_file(topo_path), file_digest(topo_path)};
    if (synthetic.empty()) throw ConfigError("provide --topo or --synthetic");
    std::vector<std::string> parts;
    std::stringstream ss(synthetic);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    const std::string kind = parts.empty() ? "" : parts[0];
    auto arg_at = [&](std::size_t i, int fallback) {
        return parts.size() > i && !parts[i].empty() ? std::stoi(parts[i]) : fallback;
    };
    if (kind == "scale-free") {
        const int chains = arg_at(1, 100);
        const int seed = arg_at(2, 7);
        const int edges = arg_at(3, 2);
        const double exponent =
            parts.size() > 4 && !parts[4].empty() ? std::stod(parts[4]) : 1.0;
        return {make_scale_free_topology(chains, edges, static_cast<std::uint64_t>(seed), exponent),
                "synthetic:" + synthetic};
    }
    if (kind == "star") return {make_star_topology(arg_at(1, 8)), "synthetic:" + synthetic};
    if (kind == "line") return {make_line_topology(arg_at(1, 4)), "synthetic:" + synthetic};
    throw ConfigError("unknown synthetic topology: " + synthetic);
}

ChainId pick_hub(const Topology& t, const ChainId& requested) {
    if (!requested.empty()) {
        if (!t.has_chain(requested)) throw ConfigError("unknown hub chain: " + requested);
        return requested;
    }
    ChainId best;
    std::size_t best_deg = 0;
    for (const auto& [id, _] : t.chains()) {
        const std::size_t d = t.degree(id);
        if (best.empty() || d > best_deg) {
            best = id;
            best_deg = d;
        }
    }
    return best;
}

const char* mode_name(ConnectivityMode m) {
    switch (m) {
        case ConnectivityMode::Direct: return "direct";
        case ConnectivityMode::Hub: return "hub";
        case ConnectivityMode::Multihop: return "multihop";
    }
    return "?";
}

// ---------------------------------------------------------------------------

int cmd_topo_validate(const std::string& path, const std::string& out_path, std::ostream& out) {
    const Topology t = load_topology_file(path);
    std::string body = meta_line(0, file_digest(path));
    body += "chains,connections,channels\n";
    body += std::to_string(t.chains().size()) + "," + std::to_string(t.connections().size()) + "," +
            std::to_string(t.channels().size()) + "\n";
    emit(out_path, out, body);
    return 0;
}

int cmd_route(const TopologyInput& ti, const std::string& src, const std::string& dst,
              const std::string& policy, const std::string& objective, int max_hops,
              std::uint64_t seed, const std::string& out_path, std::ostream& out) {
    const PolicySet ps = policy_from_flag(policy);
    const Route r = compute_route(ti.topology, src, dst, ps, parse_objective(objective), max_hops);
    std::string body = meta_line(seed, ti.digest);
    body += "src,dst,hops,channels,fee,latency_ms\n";
    std::string hops, channels;
    for (std::size_t i = 0; i < r.hops.size(); ++i) hops += (i ? "," : "") + r.hops[i];
    for (std::size_t i = 0; i < r.channels.size(); ++i) channels += (i ? "," : "") + r.channels[i];
    body += src + "," + dst + ",\"" + hops + "\",\"" + channels + "\"," + fmt(r.fee_estimate) +
            "," + fmt(r.latency_estimate_ms) + "\n";
    emit(out_path, out, body);
    return 0;
}

int cmd_exp_connectivity(const TopologyInput& ti, int nc, int nc_sweep, int hops,
                         const std::string& mode, const std::string& hub_flag, std::uint64_t seed,
                         const std::string& out_path, std::ostream& out) {
    const ChainId hub = pick_hub(ti.topology, hub_flag);
    std::vector<ConnectivityMode> modes;
    if (mode == "all") {
        modes = {ConnectivityMode::Direct, ConnectivityMode::Hub, ConnectivityMode::Multihop};
    } else if (mode == "direct") {
        modes = {ConnectivityMode::Direct};
    } else if (mode == "hub") {
        modes = {ConnectivityMode::Hub};
    } else if (mode == "multihop") {
        modes = {ConnectivityMode::Multihop};
    } else {
        throw ConfigError("unknown connectivity mode: " + mode);
    }
    std::string body = meta_line(seed, ti.digest);
    body += "nc_threshold,mode,connectivity\n";
    const int lo = nc_sweep > 0 ? 1 : nc;
    const int hi = nc_sweep > 0 ? nc_sweep : nc;
    for (int t = lo; t <= hi; ++t) {
        for (ConnectivityMode m : modes) {
            const auto res = connectivity(ti.topology, m, t, hops, hub);
            body += std::to_string(t) + "," + mode_name(m) + "," + fmt(res.connected_fraction) +
                    "\n";
        }
    }
    emit(out_path, out, body);
    return 0;
}

int cmd_exp_decentralization(const TopologyInput& ti, int k_max, const std::string& hops_list,
                             bool upgraded, int nc, std::uint64_t seed,
                             const std::string& out_path, std::ostream& out) {
    std::string body = meta_line(seed, ti.digest);
    body += "k_removed,hops,upgraded,connectivity\n";
    for (int hops : parse_int_list(hops_list)) {
        for (int up = 0; up <= (upgraded ? 1 : 0); ++up) {
            const auto curve =
                decentralization_curve(ti.topology, hops, k_max, up == 1, seed, nc);
            for (const auto& [k, frac] : curve)
                body += std::to_string(k) + "," + std::to_string(hops) + "," +
                        (up ? "yes" : "no") + "," + fmt(frac) + "\n";
        }
    }
    emit(out_path, out, body);
    return 0;
}

int cmd_exp_scalability(const std::string& rates_csv, double duration_s, const std::string& mode,
                        int endpoints, int intermediates, std::int64_t capacity,
                        std::int64_t block_ms, std::uint64_t seed, std::size_t max_packets,
                        const std::string& out_path, std::ostream& out) {
    const ScalabilityFixture fx =
        make_scalability_fixture(endpoints, intermediates, capacity, block_ms);
    std::vector<std::string> modes;
    if (mode == "both") {
        modes = {"hub", "xroute"};
    } else if (mode == "hub" || mode == "xroute") {
        modes = {mode};
    } else {
        throw ConfigError("unknown scalability mode: " + mode);
    }
    std::string body = meta_line(seed, "synthetic:scalnet:" + std::to_string(endpoints) + ":" +
                                           std::to_string(intermediates));
    body += "rate,mode,mean_latency_ms,p95_latency_ms\n";
    for (double rate : parse_double_list(rates_csv)) {
        for (const auto& m : modes) {
            SimConfig cfg;
            cfg.seed = seed;
            cfg.duration_ms = duration_s * 1000.0;
            cfg.workload_rate_per_s = rate;
            cfg.path_population = fx.paths;
            cfg.hub_chain = fx.hub;
            cfg.max_hops = 2;
            cfg.max_packets = max_packets;
            RelayerNetworkState net = default_relayer_network(fx.topology);
            const SimResult res =
                run(cfg, fx.topology, net, m == "hub" ? SimMode::Hub : SimMode::XRoute);
            const LatencyStats st = latency_stats(res.traces);
            body += fmt(rate) + "," + m + "," + (st.defined ? fmt(st.mean_ms) : "nan") + "," +
                    (st.defined ? fmt(st.p95_ms) : "nan") + "\n";
        }
    }
    emit(out_path, out, body);
    return 0;
}

int cmd_exp_costs(int hops, int validators, int amortize, std::uint64_t seed,
                  const std::string& out_path, std::ostream& out) {
    std::string body = meta_line(seed, "model");
    body += "hops,variant,gas,usd\n";
    const CostConfig cfg;
    for (int h = 1; h <= hops; ++h) {
        // Manual relaying runs a full send+receive on every leg and carries
        // no evidence.
        const double manual_gas = 2.0 * static_cast<double>(cfg.base_delivery_gas) * h;
        body += std::to_string(h) + ",manual," + fmt(manual_gas) + "," +
                fmt(manual_gas * cfg.gas_price * cfg.usd_per_gas_token) + "\n";
        const CostBreakdown no_setup = cost_model(h, validators, 1, false, cfg);
        body += std::to_string(h) + ",xroute," + fmt(no_setup.total_gas) + "," +
                fmt(no_setup.usd) + "\n";
        const CostBreakdown setup_full = cost_model(h, validators, 1, true, cfg);
        body += std::to_string(h) + ",xroute_setup_1," + fmt(setup_full.total_gas) + "," +
                fmt(setup_full.usd) + "\n";
        const CostBreakdown setup_am = cost_model(h, validators, amortize, true, cfg);
        body += std::to_string(h) + ",xroute_setup_" + std::to_string(amortize) + "," +
                fmt(setup_am.total_gas) + "," + fmt(setup_am.usd) + "\n";
    }
    emit(out_path, out, body);
    return 0;
}

int cmd_exp_swap(const std::string& trades_csv, const std::string& hops_csv, int pool_chains,
                 double liquidity, std::uint64_t seed, const std::string& out_path,
                 std::ostream& out) {
    const SwapFixture fx = make_swap_fixture(pool_chains, liquidity);
    std::vector<int> hop_limits = parse_int_list(hops_csv);
    hop_limits.push_back(-1);  // unified baseline
    const auto rows =
        stableswap_curve(fx.topology, fx.pools, fx.local, hop_limits, parse_double_list(trades_csv));
    std::string body = meta_line(seed, "synthetic:swapline:" + std::to_string(pool_chains));
    body += "hops,trade_size,output\n";
    for (const auto& r : rows) {
        body += (r.hop_limit < 0 ? std::string("unified") : std::to_string(r.hop_limit)) + "," +
                fmt(r.trade_size) + "," + fmt(r.output) + "\n";
    }
    emit(out_path, out, body);
    return 0;
}

int cmd_sim_run(const std::string& config_path, const std::string& out_path,
                const std::string& events_path, std::ostream& out) {
    std::ifstream in(config_path);
    if (!in) throw SchemaError("cannot open sim config: " + config_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("sim config is not valid JSON: ") + e.what());
    }

    Topology topo = [&]() {
        if (doc.contains("topology_path"))
            return load_topology_file(doc["topology_path"].get<std::string>());
        if (doc.contains("topology")) return load_topology(doc["topology"]);
        throw ConfigError("sim config needs 'topology_path' or inline 'topology'");
    }();

    SimConfig cfg;
    cfg.seed = doc.value("seed", 0ULL);
    cfg.duration_ms = doc.value("duration_s", 0.0) * 1000.0;
    cfg.workload_rate_per_s = doc.value("rate_per_s", 0.0);
    cfg.zipf_exponent = doc.value("zipf_exponent", 1.0);
    cfg.policy_constraints = doc.value("policy", std::string{});
    cfg.max_hops = doc.value("max_hops", 4);
    cfg.timeout_ms = doc.value("timeout_s", 1000.0) * 1000.0;
    cfg.hub_chain = doc.value("hub", std::string{});
    cfg.record_events = doc.value("record_events", false);
    cfg.track_relayer_tasks = doc.value("track_relayer_tasks", false);
    cfg.congestion_aware_routing = doc.value("congestion_aware_routing", true);
    cfg.approve_routes = doc.value("approve_routes", true);
    cfg.max_packets = doc.value("max_packets", 0ULL);
    if (doc.contains("packet_timeout_s"))
        cfg.packet_preference.push_back(make_timeout(doc["packet_timeout_s"].get<double>() * 1000.0));
    if (doc.contains("block_time_override_ms"))
        for (auto it = doc["block_time_override_ms"].begin();
             it != doc["block_time_override_ms"].end(); ++it)
            cfg.block_time_override_ms[it.key()] = it.value().get<std::int64_t>();
    if (doc.contains("capacity_override"))
        for (auto it = doc["capacity_override"].begin(); it != doc["capacity_override"].end(); ++it)
            cfg.capacity_override[it.key()] = it.value().get<std::int64_t>();
    if (doc.contains("paths")) {
        for (const auto& p : doc["paths"])
            cfg.path_population.emplace_back(p.at(0).get<std::string>(),
                                             p.at(1).get<std::string>());
    }
    if (doc.contains("multipath")) {
        MultipathConfig mp;
        mp.n_paths = doc["multipath"].value("n", 1);
        mp.threshold = doc["multipath"].value("m", 1);
        cfg.multipath = mp;
    }
    const std::string mode = doc.value("mode", std::string("xroute"));
    if (mode != "hub" && mode != "xroute") throw ConfigError("sim mode must be hub or xroute");

    RelayerNetworkState net = default_relayer_network(topo);
    const SimResult res = run(cfg, topo, net, mode == "hub" ? SimMode::Hub : SimMode::XRoute);

    std::string body = meta_line(cfg.seed, file_digest(config_path));
    body += "packet_id,committed_at_ms,delivered_at_ms,acked_at_ms,hops\n";
    for (const auto& tr : res.traces) {
        std::string hops;
        for (std::size_t i = 0; i < tr.hops.size(); ++i) hops += (i ? "," : "") + tr.hops[i];
        body += tr.packet_id + "," + fmt(tr.committed_at_ms) + "," + fmt(tr.delivered_at_ms) +
                "," + fmt(tr.acked_at_ms) + ",\"" + hops + "\"\n";
    }
    emit(out_path, out, body);

    if (!events_path.empty()) {
        std::string ev = meta_line(cfg.seed, file_digest(config_path));
        ev += "time_ms,kind,chain,packet_id,detail\n";
        for (const auto& e : res.events)
            ev += fmt(e.time_ms) + "," + e.kind + "," + e.chain + "," + e.packet_id + "," +
                  e.detail + "\n";
        std::ofstream f(events_path, std::ios::binary);
        if (!f) throw SchemaError("cannot write events file: " + events_path);
        f << ev;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"policy-driven cross-chain routing engine and simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags (--out, --seed, --topo) may follow the subcommand

    std::string topo_path, synthetic, out_path;
    std::uint64_t seed = 0;
    app.add_option("--topo", topo_path, "topology document (JSON)");
    app.add_option("--synthetic", synthetic, "synthetic topology, e.g. scale-free:100:7");
    app.add_option("--out", out_path, "write CSV here instead of stdout");
    app.add_option("--seed", seed, "randomness seed recorded in output metadata");

    // topo validate
    auto* topo = app.add_subcommand("topo", "topology tools");
    topo->require_subcommand(1);
    auto* validate = topo->add_subcommand("validate", "validate a topology document");
    std::string validate_path;
    validate->add_option("path", validate_path, "topology document")->required();

    // route
    auto* route = app.add_subcommand("route", "compute a policy-compliant route");
    std::string src, dst, policy, objective = "min-hops";
    int max_hops = 4;
    route->add_option("--src", src)->required();
    route->add_option("--dst", dst)->required();
    route->add_option("--policy", policy, "security constraints, e.g. nakamoto:8");
    route->add_option("--objective", objective, "min-hops | min-fee | min-latency");
    route->add_option("--max-hops", max_hops);

    // exp ...
    auto* exp = app.add_subcommand("exp", "experiments");
    exp->require_subcommand(1);

    auto* conn = exp->add_subcommand("connectivity", "connectivity vs NC threshold");
    int conn_nc = 8, conn_sweep = 0, conn_hops = 3;
    std::string conn_mode = "all", conn_hub;
    conn->add_option("--nc", conn_nc, "single NC threshold");
    conn->add_option("--nc-sweep", conn_sweep, "sweep thresholds 1..N");
    conn->add_option("--hops", conn_hops);
    conn->add_option("--mode", conn_mode, "direct | hub | multihop | all");
    conn->add_option("--hub", conn_hub, "hub chain (default: highest degree)");

    auto* dec = exp->add_subcommand("decentralization", "connectivity vs top-k removal");
    int dec_kmax = 4, dec_nc = 8;
    std::string dec_hops = "2,3";
    bool dec_upgraded = false;
    dec->add_option("--k-max", dec_kmax);
    dec->add_option("--hops", dec_hops, "comma-separated hop limits");
    dec->add_option("--nc", dec_nc);
    dec->add_flag("--upgraded", dec_upgraded, "also run on the upgraded topology");

    auto* scal = exp->add_subcommand("scalability", "latency vs offered load");
    std::string scal_rates = "100", scal_mode = "both";
    double scal_duration = 30.0;
    int scal_endpoints = 32, scal_intermediates = 16;
    std::int64_t scal_capacity = 100, scal_block = 1000;
    std::size_t scal_max_packets = 0;
    scal->add_option("--rates", scal_rates, "comma-separated packet rates per second");
    scal->add_option("--duration", scal_duration, "simulated seconds per point");
    scal->add_option("--mode", scal_mode, "hub | xroute | both");
    scal->add_option("--endpoints", scal_endpoints);
    scal->add_option("--intermediates", scal_intermediates);
    scal->add_option("--capacity", scal_capacity, "relay-layer tx per block");
    scal->add_option("--block-ms", scal_block);
    scal->add_option("--max-packets", scal_max_packets);

    auto* costs = exp->add_subcommand("costs", "gas cost model");
    int cost_hops = 3, cost_validators = 4, cost_amortize = 10;
    costs->add_option("--hops", cost_hops);
    costs->add_option("--validators", cost_validators);
    costs->add_option("--amortize", cost_amortize);

    auto* swap = exp->add_subcommand("swap", "cross-chain stableswap curve");
    std::string swap_trades = "1000000,10000000,100000000", swap_hops = "0,1,3";
    int swap_chains = 5;
    double swap_liquidity = 1e9;
    swap->add_option("--trades", swap_trades, "comma-separated trade sizes");
    swap->add_option("--hop-limits", swap_hops);
    swap->add_option("--pool-chains", swap_chains);
    swap->add_option("--liquidity", swap_liquidity, "total liquidity across pools");

    // sim run
    auto* sim = app.add_subcommand("sim", "simulator");
    sim->require_subcommand(1);
    auto* sim_run_cmd = sim->add_subcommand("run", "run a simulation from a config file");
    std::string sim_config, sim_events_out;
    sim_run_cmd->add_option("--config", sim_config, "sim config (JSON)")->required();
    sim_run_cmd->add_option("--events-out", sim_events_out, "also write the event log CSV here");

    std::vector<const char*> argv;
    argv.push_back("xroute");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "UsageError: " << e.what() << "\n";
        return 64;
    }

    try {
        if (*validate) return cmd_topo_validate(validate_path, out_path, out);
        if (*route) {
            return cmd_route(resolve_topology(topo_path, synthetic), src, dst, policy, objective,
                             max_hops, seed, out_path, out);
        }
        if (*conn) {
            return cmd_exp_connectivity(resolve_topology(topo_path, synthetic), conn_nc, conn_sweep,
                                        conn_hops, conn_mode, conn_hub, seed, out_path, out);
        }
        if (*dec) {
            return cmd_exp_decentralization(resolve_topology(topo_path, synthetic), dec_kmax,
                                            dec_hops, dec_upgraded, dec_nc, seed, out_path, out);
        }
        if (*scal) {
            return cmd_exp_scalability(scal_rates, scal_duration, scal_mode, scal_endpoints,
                                       scal_intermediates, scal_capacity, scal_block, seed,
                                       scal_max_packets, out_path, out);
        }
        if (*costs) return cmd_exp_costs(cost_hops, cost_validators, cost_amortize, seed, out_path, out);
        if (*swap) {
            return cmd_exp_swap(swap_trades, swap_hops, swap_chains, swap_liquidity, seed, out_path,
                                out);
        }
        if (*sim_run_cmd) return cmd_sim_run(sim_config, out_path, sim_events_out, out);
        err << "UsageError: no subcommand\n";
        return 64;
    } catch (const Error& e) {
        err << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "InternalError: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace xroute
