public class NoMsgZeroJava {
    public void alwaysFails() {
        fail();
    }
}
