"""Hand-annotated detector fixtures: (structure, source, expected count).

Each of the 22 core structures has at least one positive and one negative
case. Counts refer only to the named structure.
"""

STRUCTURE_FIXTURES = [
    # recursion
    ("recursion", "function f(n){ return n < 2 ? 1 : n * f(n - 1) }", 1),
    ("recursion", "function f(){ function g(){ f() } }", 1),
    ("recursion", "const fib = function fib(n){ return n < 2 ? n : fib(n-1) + fib(n-2) }", 1),
    ("recursion", "class T { walk(n){ if (n) this.walk(n.next) } }", 1),
    ("recursion", "function f(){ let f = () => 1; f(); }", 0),
    ("recursion", "function a(){ b() } function b(){ a() }", 0),
    # immutability
    ("object-freeze", "const o = Object.freeze({a: 1});", 1),
    ("object-freeze", "let Object = {freeze(){}}; Object.freeze({});", 0),
    ("object-assign-empty", "const c = Object.assign({}, base);", 1),
    ("object-assign-empty", "Object.assign({}, a, b);", 0),
    ("object-assign-empty", "Object.assign(target, a);", 0),
    ("array-slice-noargs", "const copy = [1, 2, 3].slice();", 1),
    ("array-slice-noargs", "const xs = [1]; const ys = xs.slice();", 1),
    ("array-slice-noargs", "function g(x){ return x.slice() }", 0),
    ("array-slice-noargs", "const xs = [1]; xs.slice(1);", 0),
    ("spread-element", "const both = [...a, ...b];", 2),
    ("spread-element", "f(...args);", 0),
    ("spread-assignment", "const anotherPerson = { ...person, age: 51 };", 1),
    ("spread-assignment", "const p = { age: 51 };", 0),
    # lazy evaluation
    ("generator", "function* ids(){ let i = 0; while (true) yield i++; }", 1),
    ("generator", "const o = { *items(){ yield 1 } };", 1),
    ("generator", "function ids(){ return [] }", 0),
    ("thunk", "const four = () => 2 + 2;", 1),
    ("thunk", "const later = async () => fetchIt();", 1),
    ("thunk", "const id = (x) => x;", 0),
    ("thunk", "const f = function(){ return 1 };", 0),
    # native higher-order functions
    ("hof-every", "const ok = [1, 2].every(v => v > 0);", 1),
    ("hof-every", "function g(xs, h){ return xs.every(h) }", 0),
    ("hof-filter", "const xs = [1, 2]; const big = xs.filter(function (v) { return v > 1 });", 1),
    ("hof-filter", "const s = 'ab'; s.filter(v => v);", 0),
    ("hof-find", "[{id: 1}].find(o => o.id === 1);", 1),
    ("hof-find", "[1].find(7);", 0),
    ("hof-findIndex", "[3, 4].findIndex(v => v === 4);", 1),
    ("hof-findIndex", "[3, 4].findIndex(4);", 0),
    ("hof-flat", "const depth = () => 1; [[1], [2]].flat(depth);", 1),
    ("hof-flat", "[[1], [2]].flat();", 0),
    ("hof-flatMap", "[1, 2].flatMap(v => [v, v]);", 1),
    ("hof-flatMap", "function g(h){ return [1].flatMap(h) }", 0),
    ("hof-forEach", "const xs = [1]; xs.forEach(v => console.log(v));", 1),
    ("hof-forEach", "xs[\"forEach\"](v => v);", 0),
    ("hof-map", "const xs = [1]; const ys = xs.map(v => v + 1);", 1),
    ("hof-map", "function g(xs, h){ return xs.map(h) }", 0),
    ("hof-reduce", "[1, 2].reduce((a, b) => a + b, 0);", 1),
    ("hof-reduce", "const n = 5; n.reduce(() => 1);", 0),
    ("hof-reduceRight", "['a', 'b'].reduceRight((acc, s) => acc + s, '');", 1),
    ("hof-reduceRight", "[1].reduceRight(undefined);", 0),
    ("hof-some", "function add(a){ return a } [1].some(add);", 1),
    ("hof-some", "[1].some(true);", 0),
    ("hof-non-native", "function make(){ return () => 1 }", 1),
    ("hof-non-native", "const adder = a => b => a + b;", 1),
    ("hof-non-native", "function apply(f, x){ return f(x) }", 0),
    # callbacks and promises
    ("callback", "function on(cb){ cb(1); cb(2); }", 1),
    ("callback", "const run = (done) => { setTimeout(() => done(), 5) };", 1),
    ("callback", "function id(x){ return x }", 0),
    ("promise", "const p = new Promise((resolve) => resolve(1));", 1),
    ("promise", "Promise.resolve(1).then(v => v);", 0),
    ("promise", "import Promise from 'bluebird'; new Promise(r => r());", 0),
]

# structures every fixture table must cover (the 22 core structures)
REQUIRED = sorted({s for s, _, _ in STRUCTURE_FIXTURES})
