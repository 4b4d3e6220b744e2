// Scripted chat-completions server: tttbench_mock --script FILE [--host H] [--port P]
#include <iostream>

#include <CLI11.hpp>

#include "tttbench/errors.hpp"
#include "tttbench/mock_endpoint.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serve scripted completions at /v1/chat/completions"};
  std::string script_path;
  std::string host = "127.0.0.1";
  int port = 8089;
  app.add_option("--script", script_path, "Mock script JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    tttbench::MockEndpoint server(tttbench::MockScript::load(script_path));
    std::cerr << "serving http://" << host << ":" << port << "/v1\n";
    server.run(host, port);
  } catch (const tttbench::Error& e) {
    std::cerr << e.what() << "\n";
    return 5;
  }
  return 0;
}
