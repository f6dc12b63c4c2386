#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"

namespace {
  std::string const data = FORGE_DATA_DIR;
  std::string const cli  = FORGE_CLI;

  struct Run {
    int         code = -1;
    std::string out, err;

    std::map<std::string, std::string> fields() const {
      std::map<std::string, std::string> m;
      std::istringstream                 in(out);
      std::string                        line;
      while (std::getline(in, line)) {
        auto c = line.find(": ");
        if (c != std::string::npos && !m.count(line.substr(0, c))) {
          m[line.substr(0, c)] = line.substr(c + 2);
        }
      }
      return m;
    }
  };

  std::string tmp(std::string const& name) {
    return (std::filesystem::temp_directory_path() / ("forge-cli-" + name)).string();
  }

  Run forge(std::string const& args, std::string const& env = "") {
    auto err_path = tmp("stderr");
    auto cmd = "cd '" + data + "' && " + env + " '" + cli + "' " + args + " 2>'" +
               err_path + "'";
    Run   r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t            n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) {
      r.out.append(buf.data(), n);
    }
    int status = pclose(p);
    r.code     = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream e(err_path);
    std::ostringstream os;
    os << e.rdbuf();
    r.err = os.str();
    return r;
  }
}  // namespace

TEST_CASE("group subcommands", "[cli]") {
  auto s = forge("group suitable s3.grp");
  CHECK(s.code == 0);
  CHECK(s.fields()["verdict"] == "suitable");

  auto q = forge("group suitable q8.grp");
  CHECK(q.code == 1);
  CHECK(q.fields()["failure"] == "center");
  CHECK(q.fields().count("central_element"));

  auto l = forge("group localization --eta z2-into-z4.hom");
  CHECK(l.code == 1);
  auto f = l.fields();
  CHECK(f["verdict"] == "not-localization");
  CHECK(f["phi"] == "0 2");
  CHECK(f["extensions"] == "2");
  CHECK(f["extension 1"] != f["extension 2"]);

  CHECK(forge("group localization --eta z2-identity.hom").code == 0);

  auto a = forge("group aut symmetric:3");
  CHECK(a.code == 0);
  CHECK(a.fields()["aut_order"] == "6");
  CHECK(forge("group complete s5.grp").code == 0);
  auto c = forge("group complete z4.grp");
  CHECK(c.code == 1);
  CHECK(c.fields()["complete"] == "false");
  auto so = forge("group socle z2.grp a5.grp");
  CHECK(so.code == 0);
  CHECK(so.fields()["socle_order"] == "60");
  CHECK(forge("group check klein").fields()["abelian"] == "true");
}

TEST_CASE("word, amalgam and hnn subcommands", "[cli]") {
  auto r = forge("word reduce s3-z2.scheme 'f1:1 f2:1'");
  CHECK(r.code == 0);
  CHECK(r.fields()["trivial"] == "true");
  CHECK(forge("word invert s3-hnn.scheme 't1 f1:2'").fields()["check"] == "1");

  auto nf = forge("amalgam nf s3-z2.scheme 'f1:2 f2:2 f1:1'");
  CHECK(nf.code == 0);
  CHECK(nf.fields()["length"] == "2");

  auto tc = forge("amalgam torsion-conj s3-z2.scheme 'f1:2 f2:2 f1:4'");
  CHECK(tc.code == 0);
  CHECK(tc.fields()["max_conjugate_length"] == "1");

  auto cc = forge("amalgam centralizer-check s3-z2.scheme --side left --x f2:2 f1:1");
  CHECK(cc.code == 1);
  CHECK(cc.fields()["outcome"] == "not-commuting");
  CHECK(cc.fields().count("violating"));

  auto h = forge("hnn reduce s3-hnn.scheme 't1^-1 f1:1 t1'");
  CHECK(h.fields()["reduced"] == "f1:4");
  CHECK(h.fields()["letters"] == "0");

  auto ri = forge("hnn realize-iso symmetric:3 --pi 2");
  CHECK(ri.code == 0);
  CHECK(ri.fields()["verified"] == "6/6");
  CHECK(ri.fields()["new_letters"] == "2");
  CHECK(forge("hnn realize-iso symmetric:3 --pi 2 --ref left").fields()["new_letters"] == "1");
  CHECK(forge("hnn realize-iso z4.grp").code == 3);

  auto mc = forge("hnn make-conjugate pair-cyclic.scheme 'f1:1 f2:1' 'f1:1 f2:2'");
  CHECK(mc.code == 0);
  CHECK(mc.fields()["verified"] == "true");
}

TEST_CASE("sc subcommands", "[cli]") {
  auto t1 = forge("sc tau --n 1");
  CHECK(t1.fields()["syllables"] == "4");
  CHECK(t1.fields()["word"] == "f1:1 f2:1 f1:1 f2:2");
  CHECK(forge("sc tau --n 80 --quiet").fields()["syllables"] == "12960");

  auto c = forge("sc certify tau80.scheme");
  CHECK(c.code == 0);
  CHECK(c.fields()["passes"] == "true");
  CHECK(c.fields()["bound"] == "1/10");
  CHECK(c.fields().count("ratio"));

  std::string const rel = "'f1:4 f2:2 f1:2 f2:3 f1:6 f2:6'";
  auto m = forge("sc decide toy.scheme " + rel);
  CHECK(m.code == 0);
  CHECK(m.fields()["verdict"] == "Member");
  CHECK(m.fields()["replay"] == "1");
  auto nm = forge("sc decide toy.scheme 'f1:4 f2:2'");
  CHECK(nm.code == 1);
  CHECK(nm.fields()["verdict"] == "NonMember");
  auto u = forge("sc decide toy.scheme 'f1:1 f2:1 f1:1 f2:1'");
  CHECK(u.code == 2);
  CHECK(u.fields()["verdict"] == "Undecided");
  CHECK(u.fields()["best_fraction"] == "1/2");

  auto ob = forge("sc obstruct obstruct.scheme");
  CHECK(ob.code == 0);
  CHECK(ob.fields()["verdict"] == "obstruction-confirmed");

  auto p = forge("--samples 20 --seed 3 sc probe");
  CHECK(p.code == 0);
  CHECK(p.fields()["left_counterexamples"] == "0");
  CHECK(p.fields()["verdict"] == "malnormal");
}

TEST_CASE("universe subcommands", "[cli]") {
  auto out = tmp("assigned.ug");
  auto a   = forge("universe assign universe.scheme --out '" + out + "'");
  CHECK(a.code == 0);
  CHECK(a.fields()["check"] == "ok");
  CHECK(forge("universe check '" + out + "'").code == 0);
  CHECK(forge("universe check universe.ug").fields()["u"] == "{0,1,3}");

  auto c = forge("universe code --session universe.session");
  CHECK(c.code == 0);
  CHECK(c.fields()["classes"] == "1");

  auto d = forge("universe density-dom universe.ug --alpha 2 --allowed '0 1 2 3'");
  CHECK(d.code == 0);
  CHECK(d.fields()["extends_input"] == "true");
  CHECK(forge("universe density-dom universe.ug --alpha 1").fields()["unchanged"] == "true");
  CHECK(forge("universe density-dom universe.ug --alpha 2 --allowed 0").code == 3);

  auto s = forge("universe density-simple universe.ug --x f1:1 --y 'f1:1 f2:2'");
  CHECK(s.code == 0);
  CHECK(s.fields()["replay"] == "true");
  CHECK(s.fields()["check"] == "ok");

  auto p = forge("--seed 5 --samples 10 universe probe --count 12");
  CHECK(p.code == 0);
  CHECK(p.fields()["verdict"] == "passes");
}

TEST_CASE("malformed input exits 3 with a line number", "[cli]") {
  auto path = tmp("bad.grp");
  std::ofstream(path) << "group X\norder 2\ntable\n0 1\n1 5\n";
  auto r = forge("group check '" + path + "'");
  CHECK(r.code == 3);
  CHECK(r.err.find("line 5") != std::string::npos);

  auto sch = tmp("bad.scheme");
  std::ofstream(sch) << "amalgam\nleft cyclic:3\nright cyclic:3\nrelator f1:1 f7:1\n";
  auto s = forge("sc certify '" + sch + "'");
  CHECK(s.code == 3);
  CHECK(s.err.find("line 4") != std::string::npos);

  CHECK(forge("group check missing.grp").code == 3);
  CHECK(forge("").code == 3);
  CHECK(forge("sc decide toy.scheme 'f1:x'").code == 3);
}

TEST_CASE("budgets exit 2", "[cli]") {
  CHECK(forge("--budget 10 group aut a5.grp").code == 2);
  CHECK(forge("group aut a5.grp", "FORGE_BUDGET=10").code == 2);
  CHECK(forge("--budget 100000000 group aut a5.grp", "FORGE_BUDGET=10").code == 0);
  CHECK(forge("group aut a5.grp", "FORGE_BUDGET=ten").code == 3);
}

TEST_CASE("reports are byte-identical across runs", "[cli]") {
  for (auto const* args :
       {"--seed 9 --samples 15 universe probe --count 10",
        "--seed 4 --samples 10 sc probe", "sc certify tau80.scheme",
        "group localization --eta z2-into-z4.hom"}) {
    auto a = forge(args);
    auto b = forge(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
  }
}
