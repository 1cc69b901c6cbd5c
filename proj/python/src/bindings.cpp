#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gcr/errors.hpp"
#include "gcr/evaluation.hpp"
#include "gcr/index.hpp"
#include "gcr/trie.hpp"

namespace py = pybind11;
using namespace gcr;

namespace {

const char* status_name(PathStatus s) {
  switch (s) {
    case PathStatus::kGrounded: return "grounded";
    case PathStatus::kUngrounded: return "ungrounded";
    case PathStatus::kMalformed: return "malformed";
  }
  return "malformed";
}

std::vector<EntityId> resolve(const KnowledgeGraph& kg, const std::vector<std::string>& names) {
  std::vector<EntityId> ids;
  for (const auto& n : names) ids.push_back(kg.entity(n));
  return ids;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Knowledge-graph tries and graph-constrained reasoning helpers";

  auto base = py::register_exception<Error>(m, "GcrError", PyExc_RuntimeError);
  py::register_exception<TrieFormatError>(m, "TrieFormatError", base.ptr());
  py::register_exception<UnknownEntityError>(m, "UnknownEntityError", base.ptr());

  py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
      .def(py::init<>())
      .def_static("from_file", [](const std::filesystem::path& p) { return load_kg_file(p); })
      .def_static("from_tsv", [](const std::string& text) {
        std::istringstream in(text);
        return load_kg(in);
      })
      .def("add_triple", [](KnowledgeGraph& kg, const std::string& h, const std::string& r, const std::string& t) {
        kg.add_triple(h, r, t);
      })
      .def_property_readonly("n_entities", &KnowledgeGraph::n_entities)
      .def_property_readonly("n_relations", &KnowledgeGraph::n_relations)
      .def_property_readonly("n_triples", &KnowledgeGraph::n_triples)
      .def("enumerate_paths",
           [](const KnowledgeGraph& kg, const std::vector<std::string>& starts, int max_hops) {
             std::vector<std::string> out;
             for (const auto& p : enumerate_paths(kg, std::span<const std::string>(starts), max_hops)) {
               out.push_back(format_path(kg, p));
             }
             return out;
           },
           py::arg("starts"), py::arg("max_hops"))
      .def("path_status", [](const KnowledgeGraph& kg, const std::string& text) {
        return status_name(parse_path(kg, text).status);
      });

  py::class_<Vocab>(m, "Vocab")
      .def_static("reference", &reference_vocab, py::arg("kg"))
      .def_static("from_file", [](const std::filesystem::path& p) { return load_vocab_file(p); })
      .def("encode", [](const Vocab& v, const std::string& s) { return v.encode(s); })
      .def("decode", [](const Vocab& v, const TokenSequence& t) { return v.decode(t); })
      .def("token", &Vocab::token)
      .def("__len__", &Vocab::size)
      .def_property_readonly("fingerprint", &Vocab::fingerprint);

  py::class_<KGTrie>(m, "KGTrie")
      .def_static("load", [](const std::filesystem::path& p) { return load_trie_file(p); })
      .def_static("from_bytes", [](const py::bytes& b) { return deserialize_trie(std::string_view(b)); })
      .def("save", [](const KGTrie& t, const std::filesystem::path& p) { save_trie_file(t, p); })
      .def("to_bytes", [](const KGTrie& t) { return py::bytes(serialize_trie(t)); })
      .def("allowed_next", [](const KGTrie& t, const TokenSequence& p) { return t.allowed_next(p); })
      .def("is_valid_prefix", [](const KGTrie& t, const TokenSequence& p) { return t.is_valid_prefix(p); })
      .def("is_complete", [](const KGTrie& t, const TokenSequence& p) { return t.is_complete(p); })
      .def("sequences", &KGTrie::sequences)
      .def_property_readonly("n_paths", &KGTrie::n_paths)
      .def_property_readonly("n_nodes", &KGTrie::n_nodes)
      .def_property_readonly("hops", &KGTrie::hops)
      .def_property_readonly("vocab_fingerprint", &KGTrie::vocab_fingerprint);

  m.def("build_trie",
        [](const std::vector<TokenSequence>& seqs, std::uint64_t fingerprint, std::uint32_t hops) {
          return build_trie(seqs, fingerprint, hops);
        },
        py::arg("sequences"), py::arg("vocab_fingerprint") = 0, py::arg("hops") = 0);
  m.def("build_question_trie",
        [](const KnowledgeGraph& kg, const std::vector<std::string>& entities, std::uint32_t hops, const Vocab& vocab) {
          return build_question_trie(kg, resolve(kg, entities), hops, vocab);
        },
        py::arg("kg"), py::arg("entities"), py::arg("hops"), py::arg("vocab"));

  m.def("hit", [](const std::vector<std::string>& p, const std::vector<std::string>& g) { return hit(p, g); });
  m.def("prf1", [](const std::vector<std::string>& p, const std::vector<std::string>& g) {
    const auto r = prf1(p, g);
    return py::make_tuple(r.precision, r.recall, r.f1);
  });
}
