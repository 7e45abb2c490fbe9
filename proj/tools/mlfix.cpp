// mlfix: ingest datasets into a bundle, analyze it (remotely or in-process),
// render the diagnosis, or run the analysis server.
//
// Exit codes: 0 ok, 2 input error, 3 server rejection, 4 network,
// 5 malformed artifact.

#include <csignal>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "mlfix/agents/pipeline.hpp"
#include "mlfix/agents/provider.hpp"
#include "mlfix/artifact/codec.hpp"
#include "mlfix/ingest/ingest.hpp"
#include "mlfix/ingest/report.hpp"
#include "mlfix/ingest/submit.hpp"
#include "mlfix/kb/knowledge_base.hpp"
#include "mlfix/server/server.hpp"

namespace {

using namespace mlfix;

enum Exit : int { kOk = 0, kInput = 2, kRejected = 3, kNetwork = 4, kMalformed = 5 };

int fail(int code, const std::string& message) {
    std::cerr << "mlfix: " << message << "\n";
    return code;
}

struct IngestArgs {
    std::string train, test, schema, predictions_train, predictions_test, checkpoint, config, out;
};

struct AnalyzeArgs {
    std::string bundle, server, out, provider = "echo", fixtures, record, kb;
    bool offline = false;
    double timeout = 130.0;
    int consensus_k = 5;
    std::int64_t seed = 7;
};

struct ReportArgs {
    std::string diagnosis, format = "markdown", out;
};

struct ServeArgs {
    std::string config, host;
    int port = -1;
};

std::optional<std::filesystem::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

int run_ingest(const IngestArgs& a) {
    ingest::IngestConfig c;
    c.train_path = a.train;
    c.test_path = opt_path(a.test);
    c.schema_path = a.schema;
    c.predictions_train_path = opt_path(a.predictions_train);
    c.predictions_test_path = opt_path(a.predictions_test);
    c.checkpoint_path = opt_path(a.checkpoint);
    c.config_path = opt_path(a.config);
    c.output_path = a.out;
    const auto bundle = ingest::ingest(c);
    std::size_t failing = 0;
    for (const auto* r : bundle.all_results()) failing += r->status == artifact::CheckStatus::fail;
    std::cerr << "wrote " << a.out << " (" << bundle.all_results().size() << " checks, " << failing << " failing)\n";
    return kOk;
}

std::shared_ptr<agents::LLMProvider> offline_provider(const AnalyzeArgs& a,
                                                      std::shared_ptr<agents::RecordingProvider>& recorder) {
    agents::ProviderSettings settings;
    settings.kind = a.provider;
    settings.fixtures = opt_path(a.fixtures);
    agents::apply_provider_env(settings);
    std::shared_ptr<agents::LLMProvider> provider = agents::make_provider(settings);
    if (!a.record.empty()) {
        recorder = std::make_shared<agents::RecordingProvider>(provider);
        provider = recorder;
    }
    return provider;
}

int run_analyze(const AnalyzeArgs& a) {
    std::string bytes;
    try {
        bytes = ingest::read_file(a.bundle);
    } catch (const std::exception& e) {
        return fail(kInput, e.what());
    }
    artifact::ArtifactBundle bundle;
    try {
        bundle = artifact::decode_bundle(bytes);
    } catch (const artifact::DecodeError& e) {
        return fail(kMalformed, a.bundle + " is not a valid bundle: " + e.what());
    }
    const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(a.timeout * 1000.0));

    std::string out;
    if (!a.offline) {
        try {
            out = ingest::submit_bundle(artifact::encode_bundle(bundle), a.server, timeout);
        } catch (const ingest::ServerRejected& e) {
            return fail(kRejected, e.what());
        } catch (const ingest::NetworkError& e) {
            return fail(kNetwork, e.what());
        }
    } else {
        std::shared_ptr<agents::RecordingProvider> recorder;
        std::shared_ptr<agents::LLMProvider> provider;
        std::optional<kb::KnowledgeBase> knowledge;
        try {
            provider = offline_provider(a, recorder);
            knowledge.emplace(a.kb.empty() ? kb::default_corpus() : kb::load_corpus_dir(a.kb));
        } catch (const std::exception& e) {
            return fail(kInput, e.what());
        }
        if (a.consensus_k < 1 || a.consensus_k % 2 == 0) return fail(kInput, "--consensus-k must be a positive odd number");
        agents::PipelineOptions options;
        options.consensus_k = a.consensus_k;
        options.seed = a.seed;
        options.deadline = std::chrono::steady_clock::now() + timeout;
        const auto diagnosis = agents::run_pipeline(bundle, provider, *knowledge, options);
        if (diagnosis.degraded) std::cerr << "mlfix: provider unavailable, wrote the rule-based diagnosis\n";
        out = artifact::encode_diagnosis(diagnosis);
        if (recorder) recorder->save(a.record);
    }
    try {
        artifact::decode_diagnosis(out);
    } catch (const artifact::DecodeError& e) {
        return fail(kMalformed, std::string("server returned a malformed diagnosis: ") + e.what());
    }
    ingest::write_file_atomic(a.out, out);
    std::cerr << "wrote " << a.out << "\n";
    return kOk;
}

int run_report(const ReportArgs& a) {
    const auto format = ingest::parse_report_format(a.format);
    if (!format) return fail(kInput, "unknown report format: " + a.format);
    std::string bytes;
    try {
        bytes = ingest::read_file(a.diagnosis);
    } catch (const std::exception& e) {
        return fail(kInput, e.what());
    }
    artifact::Diagnosis diagnosis;
    try {
        diagnosis = artifact::decode_diagnosis(bytes);
    } catch (const artifact::DecodeError& e) {
        return fail(kMalformed, a.diagnosis + " is not a valid diagnosis: " + e.what());
    }
    const auto text = ingest::render_report(diagnosis, *format);
    if (a.out.empty()) {
        std::cout << text;
    } else {
        ingest::write_file_atomic(a.out, text);
    }
    return kOk;
}

int run_serve(const ServeArgs& a) {
    server::ServerConfig config;
    std::shared_ptr<agents::LLMProvider> provider;
    std::optional<kb::KnowledgeBase> knowledge;
    try {
        config = server::load_config(opt_path(a.config));
        if (!a.host.empty()) config.host = a.host;
        if (a.port >= 0) config.port = a.port;
        server::validate(config);
        provider = agents::make_provider(config.provider);
        knowledge.emplace(config.kb_path ? kb::load_corpus_dir(*config.kb_path) : kb::seed_corpus());
    } catch (const std::exception& e) {
        return fail(kInput, e.what());
    }

    // Signals go to a dedicated thread so stop() never runs in a handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    server::AnalysisService service(config, provider, std::move(*knowledge));
    server::HttpServer http(service);
    int port = 0;
    try {
        port = http.bind(config.host, config.port);
    } catch (const std::exception& e) {
        return fail(kNetwork, e.what());
    }
    std::cout << "listening on " << config.host << ":" << port << " (provider " << provider->id() << ", "
              << service.knowledge_base().size() << " kb documents)" << std::endl;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        http.stop();
    });
    http.listen();
    // listen() only returns after stop(), unless the socket failed; wake the
    // waiter in that case so join() cannot hang.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mlfix: diagnose ML training failures from dataset and checkpoint artifacts"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mlfix 1.0.0");

    IngestArgs ia;
    auto* ingest_cmd = app.add_subcommand("ingest", "Run the check suites and write a bundle");
    ingest_cmd->add_option("--train", ia.train, "Training split CSV")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--test", ia.test, "Test split CSV")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--schema", ia.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--predictions-train", ia.predictions_train, "Predictions JSON for the train split");
    ingest_cmd->add_option("--predictions-test", ia.predictions_test, "Predictions JSON for the test split");
    ingest_cmd->add_option("--checkpoint", ia.checkpoint, "Checkpoint metadata JSON");
    ingest_cmd->add_option("--config", ia.config, "Check threshold overrides JSON");
    ingest_cmd->add_option("--out", ia.out, "Output bundle path")->required();

    AnalyzeArgs aa;
    auto* analyze_cmd = app.add_subcommand("analyze", "Diagnose a bundle");
    analyze_cmd->alias("submit");
    analyze_cmd->add_option("--bundle", aa.bundle, "Bundle JSON")->required();
    auto* server_opt = analyze_cmd->add_option("--server", aa.server, "Analysis server URL");
    auto* offline_flag = analyze_cmd->add_flag("--offline", aa.offline, "Run the pipeline in-process");
    server_opt->excludes(offline_flag);
    analyze_cmd->add_option("--timeout", aa.timeout, "Seconds before giving up")->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--out", aa.out, "Output diagnosis path")->required();
    analyze_cmd->add_option("--provider", aa.provider, "Offline provider")
        ->check(CLI::IsMember({"echo", "scripted", "http"}));
    analyze_cmd->add_option("--fixtures", aa.fixtures, "Prompt-hash fixture file for the scripted provider");
    analyze_cmd->add_option("--record-fixtures", aa.record, "Write every completion to a fixture file");
    analyze_cmd->add_option("--kb", aa.kb, "Knowledge-base directory");
    analyze_cmd->add_option("--consensus-k", aa.consensus_k, "Self-consistency samples (odd)");
    analyze_cmd->add_option("--seed", aa.seed, "Base sampling seed");

    ReportArgs ra;
    auto* report_cmd = app.add_subcommand("report", "Render a diagnosis as a Finding/Action table");
    report_cmd->add_option("--diagnosis", ra.diagnosis, "Diagnosis JSON")->required();
    report_cmd->add_option("--format", ra.format, "markdown or plain");
    report_cmd->add_option("--out", ra.out, "Write to a file instead of stdout");

    ServeArgs sa;
    auto* serve_cmd = app.add_subcommand("serve", "Run the analysis server");
    serve_cmd->add_option("--config", sa.config, "Server config JSON");
    serve_cmd->add_option("--host", sa.host, "Bind address");
    serve_cmd->add_option("--port", sa.port, "Port (0 picks a free one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }
    if (analyze_cmd->parsed() && !aa.offline && aa.server.empty()) {
        return fail(kInput, "analyze needs --server URL or --offline");
    }

    try {
        if (ingest_cmd->parsed()) return run_ingest(ia);
        if (analyze_cmd->parsed()) return run_analyze(aa);
        if (report_cmd->parsed()) return run_report(ra);
        if (serve_cmd->parsed()) return run_serve(sa);
    } catch (const ingest::InputError& e) {
        return fail(kInput, e.what());
    } catch (const artifact::DecodeError& e) {
        return fail(kMalformed, e.what());
    } catch (const std::exception& e) {
        return fail(kInput, e.what());
    }
    return kOk;
}
