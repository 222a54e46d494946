int nondet();
int main() {
  int a = nondet();
  int q = 7 / a;
  int r = 7 % a;
  if (q * a + r != 7) {
    if (a != 0) {
      assert(0);
    }
  }
  return 0;
}
