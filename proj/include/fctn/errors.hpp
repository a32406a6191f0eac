#pragma once

#include <stdexcept>
#include <string>

namespace fctn {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// tensor layer
class InvalidMode : public Error { public: using Error::Error; };
class ShapeMismatch : public Error { public: using Error::Error; };
class InvalidAxes : public Error { public: using Error::Error; };
class DegenerateReference : public Error { public: using Error::Error; };

// network / ALS
class SingularSystem : public Error { public: using Error::Error; };

// objective
class EmptyCollection : public Error { public: using Error::Error; };

// search
class InvalidRank : public Error { public: using Error::Error; };
class SpaceTooLarge : public Error { public: using Error::Error; };

// llm strategy
class ParseFailure : public Error { public: using Error::Error; };
class MissingEdge : public Error {
public:
    MissingEdge(int i, int j)
        : Error("RANKS block is missing edge R(" + std::to_string(i) + "," + std::to_string(j) + ")"),
          i(i), j(j) {}
    int i, j;
};
class InvalidRankToken : public Error { public: using Error::Error; };
class DuplicateEdge : public Error { public: using Error::Error; };
class ProposalFailed : public Error { public: using Error::Error; };

// llm client
class ContextOverflow : public Error { public: using Error::Error; };
class ClientUnavailable : public Error { public: using Error::Error; };
class ProtocolError : public Error { public: using Error::Error; };
class ScriptExhausted : public Error { public: using Error::Error; };

// data
class SeriesTooShort : public Error { public: using Error::Error; };
class DegenerateSplit : public Error { public: using Error::Error; };
class MissingCell : public Error { public: using Error::Error; };
class DuplicateCell : public Error { public: using Error::Error; };
class UnknownColumn : public Error { public: using Error::Error; };

// reporting
class ReportError : public Error { public: using Error::Error; };

} // namespace fctn
