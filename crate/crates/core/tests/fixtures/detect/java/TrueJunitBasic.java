import org.junit.Test;
import static org.junit.Assert.assertEquals;

public class TrueJunitBasic {
    @Test
    public void addsSmallNumbers() {
        assertEquals(4, 2 + 2);
    }
}
